"""Stack interpreter for question programs.

Values on the stack are object sets (``frozenset`` of ids), the scene marker,
booleans and answer strings.  Steps that need a single object raise
:class:`AmbiguousReference` or :class:`EmptySelection`; asking for an
attribute the object lacks raises :class:`MissingAttribute`.  These signal
questions that cannot be generated, not interpreter bugs.
"""

from __future__ import annotations

from ..ontology import Ontology
from ..scenegraph import SAMENESS_TYPES, SceneGraph
from .parser import ALL_OBJECTS, SCENE, WILDCARD, Program, Step, is_binary_same


class ExecutionError(Exception):
    def __init__(self, message: str, step: int):
        self.step = step
        self.reason = message
        super().__init__(f"step {step}: {message}")


class AmbiguousReference(ExecutionError):
    pass


class EmptySelection(ExecutionError):
    pass


class MissingAttribute(ExecutionError):
    pass


class _Scene:
    def __repr__(self) -> str:
        return "<scene>"


SCENE_MARKER = _Scene()


def answer_text(value: bool | str) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    return value


class _Run:
    def __init__(self, g: SceneGraph, ontology: Ontology):
        self.g = g
        self.ont = ontology

    # helpers --------------------------------------------------------------

    def matches(self, oid: str, concept: str) -> bool:
        return concept == WILDCARD or self.ont.is_a(self.g.objects[oid].concept, concept)

    def single(self, objs: frozenset, i: int, op: str) -> str:
        if not objs:
            raise EmptySelection(f"{op} needs one object, found none", i)
        if len(objs) > 1:
            raise AmbiguousReference(f"{op} needs one object, found {len(objs)}", i)
        return next(iter(objs))

    def values(self, oid: str, type_: str) -> list[str]:
        o = self.g.objects[oid]
        if type_ == "name":
            return [o.concept]
        if type_ == "position":
            return list(o.positions)
        return [a for a in o.attributes if self.ont[a].category == type_]

    def value(self, oid: str, type_: str, i: int) -> str:
        vals = self.values(oid, type_)
        if not vals:
            raise MissingAttribute(f"object {oid} has no {type_}", i)
        if len(vals) > 1:
            raise AmbiguousReference(f"object {oid} has several {type_} values", i)
        return vals[0]

    def global_value(self, type_: str | None, i: int) -> str:
        if type_ is None or type_ not in self.g.globals:
            raise MissingAttribute(f"scene has no {type_}", i)
        return self.g.globals[type_]

    def neighbours(self, anchors, relation: str, direction: str | None) -> set[str]:
        out: set[str] = set()
        edges = self.g.out_edges if (direction or "object") == "object" else self.g.in_edges
        for a in anchors:
            for p, other in edges.get(a, ()):
                if p == relation:
                    out.add(other)
        return out

    def pair_same(self, a: str, b: str, type_: str, i: int) -> bool:
        if type_ in SAMENESS_TYPES:
            flag = self.g.same(a, b, type_)
            if flag is None:
                raise MissingAttribute(f"objects {a} and {b} are not comparable by {type_}", i)
            return flag
        return self.value(a, type_, i) == self.value(b, type_, i)

    def comparable_types(self, ids, i: int) -> list[str]:
        types = [t for t in SAMENESS_TYPES if all(self.values(o, t) for o in ids)]
        if not types:
            raise MissingAttribute("objects share no comparable attribute type", i)
        return types

    # main loop ------------------------------------------------------------

    def run(self, steps: tuple[Step, ...]) -> list:
        stack: list = []
        for i, s in enumerate(steps, 1):
            op = s.op
            if op == "select":
                name = s.operands[0]
                if name == SCENE:
                    stack.append(SCENE_MARKER)
                elif name == ALL_OBJECTS:
                    stack.append(frozenset(self.g.objects))
                else:
                    stack.append(frozenset(o for o in self.g.objects if self.matches(o, name)))
            elif op == "filter":
                v = s.operands[0]
                stack.append(frozenset(o for o in stack.pop() if self.g.objects[o].has(v)))
            elif op == "relate":
                found = self.neighbours(stack.pop(), s.relations[0], s.direction)
                stack.append(frozenset(o for o in found if self.matches(o, s.operands[0])))
            elif op == "exist":
                stack.append(bool(stack.pop()))
            elif op == "verifyAttr":
                stack.append(self.verify(stack.pop(), s, i))
            elif op == "query":
                top = stack.pop()
                if top is SCENE_MARKER:
                    stack.append(self.global_value(s.type_arg, i))
                else:
                    stack.append(self.value(self.single(top, i, op), s.type_arg, i))
            elif op == "choose":
                stack.append(self.choose(stack.pop(), s, i))
            elif op == "verifyRel":
                anchor = self.single(stack.pop(), i, op)
                found = self.neighbours([anchor], s.relations[0], s.direction)
                stack.append(any(self.matches(o, s.operands[0]) for o in found))
            elif op == "chooseRel":
                anchor = self.single(stack.pop(), i, op)
                holds = [
                    r for r in s.relations
                    if any(self.matches(o, s.operands[0]) for o in self.neighbours([anchor], r, s.direction))
                ]
                stack.append(self.pick(holds, i, op))
            elif op in ("and", "or"):
                b, a = stack.pop(), stack.pop()
                stack.append((a and b) if op == "and" else (a or b))
            elif op == "not":
                stack.append(not stack.pop())
            elif op == "compare":
                b, a = stack.pop(), stack.pop()
                stack.append(self.compare(self.single(a, i, op), self.single(b, i, op), s, i))
            elif op == "common":
                b, a = stack.pop(), stack.pop()
                a, b = self.single(a, i, op), self.single(b, i, op)
                shared = [t for t in SAMENESS_TYPES if self.g.same(a, b, t)]
                if not shared:
                    raise MissingAttribute(f"objects {a} and {b} have nothing in common", i)
                stack.append(shared[0])
            elif op in ("same", "different"):
                stack.append(self.same(stack, steps, s, i))
        return stack

    def verify(self, top, s: Step, i: int) -> bool:
        v = s.operands[0]
        if top is SCENE_MARKER:
            return self.global_value(s.type_arg, i) == v
        oid = self.single(top, i, "verify")
        if s.type_arg and not self.values(oid, s.type_arg):
            raise MissingAttribute(f"object {oid} has no {s.type_arg}", i)
        return self.g.objects[oid].has(v)

    def choose(self, top, s: Step, i: int) -> str:
        t = s.type_arg
        if top is SCENE_MARKER:
            actual = self.global_value(t, i)
            return self.pick([v for v in s.operands if v == actual], i, "choose")
        oid = self.single(top, i, "choose")
        if t is None or t == "name":
            concept = self.g.objects[oid].concept
            return self.pick([v for v in s.operands if self.ont.is_a(concept, v)], i, "choose")
        have = self.values(oid, t)
        if not have:
            raise MissingAttribute(f"object {oid} has no {t}", i)
        return self.pick([v for v in s.operands if v in have], i, "choose")

    def pick(self, holds: list[str], i: int, op: str) -> str:
        if not holds:
            raise MissingAttribute(f"{op}: no alternative holds", i)
        if len(holds) > 1:
            raise AmbiguousReference(f"{op}: both alternatives hold", i)
        return holds[0]

    def compare(self, a: str, b: str, s: Step, i: int) -> str:
        t, word = s.type_arg, s.operands[0]
        if t not in self.ont.comparatives or word not in self.ont.comparatives[t]:
            raise MissingAttribute(f"no comparative {word!r} for {t}", i)
        ra = self.ont.rank(t, self.value(a, t, i))
        rb = self.ont.rank(t, self.value(b, t, i))
        if ra is None or rb is None:
            raise MissingAttribute(f"{t} values are not ordered", i)
        if ra == rb:
            raise AmbiguousReference(f"objects {a} and {b} tie on {t}", i)
        more = word == self.ont.comparatives[t][0]
        winner = a if (ra > rb) == more else b
        ca, cb = self.g.objects[a].concept, self.g.objects[b].concept
        if ca == cb:
            raise AmbiguousReference(f"both objects are called {ca!r}", i)
        return self.g.objects[winner].concept

    def same(self, stack: list, steps: tuple[Step, ...], s: Step, i: int) -> bool:
        want_same = s.op == "same"
        if is_binary_same(steps, i - 1):
            b, a = stack.pop(), stack.pop()
            a, b = self.single(a, i, s.op), self.single(b, i, s.op)
            types = [s.type_arg] if s.type_arg else self.comparable_types([a, b], i)
            equal = all(self.pair_same(a, b, t, i) for t in types)
            return equal if want_same else not equal
        members = sorted(stack.pop())
        if len(members) < 2:
            raise EmptySelection(f"{s.op} needs at least two objects, found {len(members)}", i)
        types = [s.type_arg] if s.type_arg else self.comparable_types(members, i)
        results = []
        for t in types:
            vals = [self.value(o, t, i) for o in members]
            results.append(len(set(vals)) == 1 if want_same else len(set(vals)) == len(vals))
        return all(results)


def run_steps(steps: tuple[Step, ...], g: SceneGraph, ontology: Ontology) -> list:
    """Execute a (possibly partial) step chain and return the final stack."""
    return _Run(g, ontology).run(tuple(steps))


def execute(program: Program, g: SceneGraph, ontology: Ontology) -> bool | str:
    """Execute a type-checked program and return its boolean or string answer."""
    stack = run_steps(program.steps, g, ontology)
    return stack[-1]


def resolve(steps: tuple[Step, ...], g: SceneGraph, ontology: Ontology) -> frozenset[str]:
    """Object set produced by a select/filter/relate chain."""
    top = run_steps(steps, g, ontology)[-1]
    if not isinstance(top, frozenset):
        raise TypeError("step chain does not end in an object set")
    return top
