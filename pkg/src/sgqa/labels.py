"""Global and local answer-group labels derived from a program."""

from __future__ import annotations

from dataclasses import dataclass

from .program import SCENE, WILDCARD, Program, Step, build_tree, classify, parse_program


@dataclass(frozen=True)
class GroupLabel:
    global_: str
    local: str


def _named(chain: list[Step]) -> list[str]:
    return [s.operands[0] for s in chain if s.op in ("select", "relate") and s.operands[0] != WILDCARD]


def main_subject(program: Program) -> str:
    """The concept a question is about: the object its first reference resolves to."""
    root = build_tree(program)
    node = root
    while node.children and node.step.op not in ("select", "filter", "relate"):
        node = node.children[0]
    chain = []
    while node is not None:
        chain.append(node.step)
        node = node.children[0] if node.children else None
    chain.reverse()
    names = _named(chain)
    if not names:
        return SCENE
    _, _, detailed = classify(program)
    if detailed in ("queryObject", "chooseObject") and len(names) > 1:
        return names[-2]
    return names[-1]


def _last_relation(program: Program) -> str:
    rels = [s for s in program.steps if s.op in ("relate", "verifyRel", "chooseRel")]
    return "|".join(sorted(rels[-1].relations)) if rels else "none"


def label_groups(program: Program | str) -> GroupLabel:
    """Answer-type label (global) and subject-qualified label (local)."""
    if isinstance(program, str):
        program = parse_program(program)
    _, _, detailed = classify(program)
    last = program.steps[-1]
    if detailed in ("queryAttr", "queryGlobal"):
        glob = last.type_arg
    elif detailed == "queryObject":
        root = build_tree(program)
        glob = _named(root.chain)[-1]
    elif detailed == "chooseObject":
        root = build_tree(program)
        glob = f"chooseObject-{_named(root.chain)[-1]}"
    elif detailed in ("verifyAttr", "chooseAttr", "verifyGlobal", "chooseGlobal", "compare"):
        glob = f"{detailed}-{last.type_arg}"
    elif detailed in ("twoSame", "twoDiff", "allSame", "allDiff"):
        glob = f"{detailed}-{last.type_arg or 'all'}"
    elif detailed in ("queryRel", "chooseObjRel", "existRel", "verifyRel", "chooseRel"):
        glob = f"{detailed}-{_last_relation(program)}"
    else:
        glob = detailed
    return GroupLabel(glob, f"{main_subject(program)}-{glob}")
