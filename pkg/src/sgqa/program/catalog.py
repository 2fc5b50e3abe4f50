"""The question-type catalog and program classification.

Each detailed type is recognised by the shape of the program's expression
tree: the final operation, whether it reads the scene, and the steps in the
reference chains feeding it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parser import SCENE, WILDCARD, Program, Step, is_binary_same, parse_program


@dataclass(frozen=True)
class TypeInfo:
    detailed: str
    answer: str  # "binary" or "open"
    structural: str
    semantic: str
    form: str
    example: str


CATALOG: dict[str, TypeInfo] = {
    t.detailed: t
    for t in [
        TypeInfo("queryGlobal", "open", "query", "global", "select: scene/query: type", "How is the weather in the image?"),
        TypeInfo("verifyGlobal", "binary", "verify", "global", "select: scene/verify type: attr", "Is it cloudy today?"),
        TypeInfo("chooseGlobal", "open", "query", "global", "select: scene/choose type: a|b", "Is it sunny or cloudy?"),
        TypeInfo("queryAttr", "open", "query", "attribute", "select: obj/.../query: type", "What color is the apple?"),
        TypeInfo("verifyAttr", "binary", "verify", "attribute", "select: obj/.../verify type: attr", "Is the apple red?"),
        TypeInfo("verifyAttrs", "binary", "logical", "attribute", "select: obj/.../verify t1: a1/select: obj/.../verify t2: a2/and", "Is the apple red and shiny?"),
        TypeInfo("chooseAttr", "open", "choose", "attribute", "select: obj/.../choose type: a|b", "Is the apple green or red?"),
        TypeInfo("exist", "binary", "verify", "object", "select: obj/.../exist", "Is there an apple in the picture?"),
        TypeInfo("existRel", "binary", "verify", "relation", "select: subj/.../relate(rel): obj/exist", "Is there an apple on the black table?"),
        TypeInfo("logicOr", "binary", "logical", "object", "select: obj1/.../exist/select: obj2/.../exist/or", "Do you see either an apple or a banana there?"),
        TypeInfo("logicAnd", "binary", "logical", "obj/attr", "select: obj1/.../exist/select: obj2/.../exist/and", "Do you see both green apples and bananas there?"),
        TypeInfo("queryObject", "open", "query", "category", "select: category/.../query: name", "What kind of fruit is on the table?"),
        TypeInfo("chooseObject", "open", "choose", "category", "select: category/.../choose: a|b", "What kind of fruit is it, an apple or a banana?"),
        TypeInfo("queryRel", "open", "query", "relation", "select: subj/.../relate(rel): _/query: name", "What is the small girl wearing?"),
        TypeInfo("verifyRel", "binary", "verify", "relation", "select: subj/.../verifyRel(rel): obj", "Is she wearing a blue dress?"),
        TypeInfo("chooseRel", "open", "choose", "relation", "select: subj/.../chooseRel(r1|r2): obj", "Is the cat to the left or to the right of the flower?"),
        TypeInfo("chooseObjRel", "open", "choose", "relation", "select: subj/.../relate(rel): _/choose: a|b", "What is the boy eating, an apple or a slice of pizza?"),
        TypeInfo("compare", "open", "compare", "object", "select: obj1/.../select: obj2/.../compare type: word", "Who is taller, the boy or the girl?"),
        TypeInfo("common", "open", "compare", "object", "select: obj1/.../select: obj2/.../common", "What is common to the shirt and the flower?"),
        TypeInfo("twoSame", "binary", "compare", "object", "select: obj1/.../select: obj2/.../same type", "Does the shirt and the flower have the same color?"),
        TypeInfo("twoDiff", "binary", "compare", "object", "select: obj1/.../select: obj2/.../different type", "Are the table and the chair made of different materials?"),
        TypeInfo("allSame", "binary", "compare", "object", "select: allObjs/same type", "Are all the people there the same gender?"),
        TypeInfo("allDiff", "binary", "compare", "object", "select: allObjs/different type", "Are the animals in the image of different types?"),
    ]
}

BINARY_TYPES = frozenset(t for t, info in CATALOG.items() if info.answer == "binary")
STRUCTURAL_TYPES = ("verify", "query", "choose", "logical", "compare")
SEMANTIC_TYPES = ("object", "attribute", "category", "relation", "global")


class UnclassifiableProgram(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    step: Step
    index: int  # 0-based position in the program
    children: tuple["Node", ...] = ()

    @property
    def chain(self) -> list[Step]:
        """The select/filter/relate chain under a terminal node, bottom first."""
        out: list[Step] = []
        node = self.children[0] if self.children else None
        while node is not None:
            out.append(node.step)
            node = node.children[0] if node.children else None
        return out[::-1]


def build_tree(program: Program) -> Node:
    stack: list[Node] = []
    steps = program.steps
    for i, s in enumerate(steps):
        op = s.op
        if op == "select":
            n = 0
        elif op in ("and", "or", "compare", "common"):
            n = 2
        elif op in ("same", "different"):
            n = 2 if is_binary_same(steps, i) else 1
        else:
            n = 1
        children = tuple(stack[len(stack) - n:]) if n else ()
        if n:
            del stack[len(stack) - n:]
        stack.append(Node(s, i, children))
    if len(stack) != 1:
        raise UnclassifiableProgram("program does not reduce to a single expression")
    return stack[0]


def chain_of(node: Node) -> list[Step]:
    """Reference chain rooted at ``node`` (which is itself a chain step)."""
    out = []
    while node is not None:
        out.append(node.step)
        node = node.children[0] if node.children else None
    return out[::-1]


def _on_scene(node: Node) -> bool:
    chain = node.chain
    return bool(chain) and chain[0].op == "select" and chain[0].operands[0] == SCENE


def _ends_in_wildcard(chain: list[Step]) -> bool:
    return bool(chain) and chain[-1].op == "relate" and chain[-1].operands[0] == WILDCARD


def detailed_type(program: Program) -> str:
    root = build_tree(program)
    op = root.step.op
    chain = root.chain
    if op == "query":
        if _on_scene(root):
            return "queryGlobal"
        if root.step.type_arg == "name":
            return "queryRel" if _ends_in_wildcard(chain) else "queryObject"
        return "queryAttr"
    if op == "verifyAttr":
        return "verifyGlobal" if _on_scene(root) else "verifyAttr"
    if op == "choose":
        if _on_scene(root):
            return "chooseGlobal"
        if root.step.type_arg not in (None, "name"):
            return "chooseAttr"
        return "chooseObjRel" if _ends_in_wildcard(chain) else "chooseObject"
    if op == "exist":
        return "existRel" if any(s.op == "relate" for s in chain) else "exist"
    if op in ("and", "or"):
        kids = [c.step.op for c in root.children]
        if kids == ["exist", "exist"]:
            return "logicAnd" if op == "and" else "logicOr"
        if op == "and" and kids == ["verifyAttr", "verifyAttr"] and not any(_on_scene(c) for c in root.children):
            return "verifyAttrs"
    if op in ("verifyRel", "chooseRel", "compare", "common"):
        return op
    if op in ("same", "different"):
        two = len(root.children) == 2
        return {("same", True): "twoSame", ("different", True): "twoDiff",
                ("same", False): "allSame", ("different", False): "allDiff"}[(op, two)]
    raise UnclassifiableProgram(f"unclassifiable program {program}")


def classify(program: Program | str) -> tuple[str, str, str]:
    """(structural, semantic, detailed) types of a program."""
    if isinstance(program, str):
        program = parse_program(program)
    detailed = detailed_type(program)
    info = CATALOG[detailed]
    semantic = info.semantic
    if semantic == "obj/attr":
        semantic = "attribute" if any(s.op == "filter" for s in program.steps) else "object"
    return info.structural, semantic, detailed
