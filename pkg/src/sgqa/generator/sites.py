"""Generation sites: where in a graph each question group can be asked.

Each binder walks one graph and yields :class:`Site` objects.  A site holds
one or more candidate :class:`Binding` values (usually the same question with
different references); the engine tries them in order until one is accepted.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from ..ontology import SCENE, Ontology, PlausibilityTable
from ..scenegraph import ABSENT, POSITIONAL, SAMENESS_TYPES, SceneGraph, count_matching, uniqueness
from .decoys import NoDecoyAvailable, Slot, select_decoy
from .references import Reference, ReferenceBuilder
from .text import Phrase, copula, indefinite, plural

OBJECT_ATTR_TYPES = ("color", "material", "shape", "size", "height", "age", "activity")
COMPARABLE_ORDERED = ("size", "height", "age")
TYPE_PLURALS = {"color": "colors", "material": "materials", "shape": "shapes", "name": "kinds"}

# Share of the quadratic pair/positional sites that is actually visited.
POSITIONAL_SHARE = 0.15
PAIR_SHARE = 0.25


@dataclass
class Binding:
    fields: dict
    program: dict
    conds: dict = field(default_factory=dict)
    asked: frozenset = frozenset()
    refs: tuple[Reference, ...] = ()
    answer_object: str | None = None


@dataclass
class Site:
    group: str
    key: str
    bindings: list[Binding]


@dataclass
class GenContext:
    ontology: Ontology
    table: PlausibilityTable
    unannotated: frozenset = frozenset()
    max_depth: int = 2
    attempts: int = 3


class GraphSites:
    """Per-graph helper shared by all binders."""

    def __init__(self, g: SceneGraph, ctx: GenContext, rng: random.Random):
        self.g = g
        self.ctx = ctx
        self.ont = ctx.ontology
        self.rng = rng
        self.builder = ReferenceBuilder(g, ctx.ontology)
        self.ids = sorted(g.objects)

    # helpers ---------------------------------------------------------------

    def refs(self, oid: str, head: str | None = None) -> list[Reference]:
        refs = list(self.builder.build(oid, self.ctx.max_depth, head))
        self.rng.shuffle(refs)
        return refs[: self.ctx.attempts]

    def concept(self, oid: str) -> str:
        return self.g.objects[oid].concept

    def single_value(self, oid: str, type_: str) -> str | None:
        vals = [a for a in self.g.objects[oid].attributes if self.ont[a].category == type_]
        return vals[0] if len(vals) == 1 else None

    def types_of(self, oid: str, allowed=OBJECT_ATTR_TYPES) -> list[str]:
        return [t for t in allowed if self.single_value(oid, t) is not None]

    def decoy(self, subject: str, slot: Slot, truth: str) -> str | None:
        try:
            return select_decoy(self.g, subject, slot, truth, self.rng, self.ont, self.ctx.table, self.ctx.unannotated)
        except NoDecoyAvailable:
            return None

    def is_(self, oid: str) -> str:
        return copula(self.ont, self.concept(oid))

    def a(self, concept: str, oid: str | None = None, words: str | None = None) -> Phrase:
        return ((indefinite(self.ont, concept, words), oid),)

    def the(self, oid: str) -> Phrase:
        return (("the " + self.concept(oid), oid),)

    def present_concepts(self) -> list[str]:
        return sorted({o.concept for o in self.g.objects.values()})

    def absent_concept(self, subject_oid: str) -> str | None:
        return self.decoy(subject_oid, Slot("object"), self.concept(subject_oid))

    def negation(self, concept: str) -> str:
        return f"there {copula(self.ont, concept)} no {concept}"

    def relations(self, positional_share: float = POSITIONAL_SHARE):
        """Relation triplets, keeping only a sample of the positional ones."""
        for r in self.g.relations:
            if r.predicate in POSITIONAL and self.rng.random() >= positional_share:
                continue
            yield r

    def pairs(self, share: float = PAIR_SHARE):
        for x, y in itertools.combinations(self.ids, 2):
            if self.rng.random() < share:
                yield x, y

    def ref_pairs(self, x: str, y: str) -> list[tuple[Reference, Reference]]:
        rx, ry = self.refs(x), self.refs(y)
        out = []
        for r1, r2 in zip(rx, ry):
            if x not in r2.mentions and y not in r1.mentions:
                out.append((r1, r2) if self.rng.random() < 0.5 else (r2, r1))
        return out


def _ref_binding(ref: Reference, name: str = "ref") -> tuple[dict, dict]:
    return {name: ref.phrase}, {name: ref.program}


# --------------------------------------------------------------------------
# attribute questions


def bind_query_attr(s: GraphSites) -> Iterator[Site]:
    for oid in s.ids:
        for t in s.types_of(oid):
            value = s.single_value(oid, t)
            bindings = []
            for ref in s.refs(oid):
                f, p = _ref_binding(ref)
                f.update(type=t, value=value, **{"is": s.is_(oid)})
                p.update(type=t)
                bindings.append(Binding(f, p, {"type": t}, frozenset({("attr", oid, t)}), (ref,)))
            yield Site("queryAttr", f"{oid}:{t}", bindings)


def bind_verify_attr(s: GraphSites) -> Iterator[Site]:
    for oid in s.ids:
        for t in s.types_of(oid):
            truth = s.single_value(oid, t)
            value = truth
            if s.rng.random() < 0.5:
                value = s.decoy(oid, Slot("attribute", t), truth) or truth
            bindings = []
            for ref in s.refs(oid):
                f, p = _ref_binding(ref)
                f.update(type=t, value=value, truth=truth, **{"is": s.is_(oid)})
                p.update(type=t, value=value)
                bindings.append(Binding(f, p, {"type": t}, frozenset({("attr", oid, t)}), (ref,)))
            yield Site("verifyAttr", f"{oid}:{t}", bindings)


def bind_choose_attr(s: GraphSites) -> Iterator[Site]:
    for oid in s.ids:
        for t in s.types_of(oid):
            truth = s.single_value(oid, t)
            decoy = s.decoy(oid, Slot("attribute", t), truth)
            if decoy is None:
                continue
            a, b = (truth, decoy) if s.rng.random() < 0.5 else (decoy, truth)
            bindings = []
            for ref in s.refs(oid):
                f, p = _ref_binding(ref)
                f.update(type=t, a=a, b=b, **{"is": s.is_(oid)})
                p.update(type=t, a=a, b=b)
                bindings.append(Binding(f, p, {"type": t}, frozenset({("attr", oid, t)}), (ref,)))
            yield Site("chooseAttr", f"{oid}:{t}", bindings)


def bind_verify_attrs(s: GraphSites) -> Iterator[Site]:
    for oid in s.ids:
        types = s.types_of(oid)
        for t1, t2 in itertools.combinations(types, 2):
            truths = [s.single_value(oid, t1), s.single_value(oid, t2)]
            values = list(truths)
            if s.rng.random() < 0.5:
                flip = s.rng.choice([[0], [1], [0, 1]])
                for i in flip:
                    values[i] = s.decoy(oid, Slot("attribute", (t1, t2)[i]), truths[i]) or truths[i]
            bindings = []
            for ref in s.refs(oid):
                f, p = _ref_binding(ref)
                f.update(t1=t1, t2=t2, v1=values[0], v2=values[1], truth1=truths[0], truth2=truths[1],
                         **{"is": s.is_(oid)})
                p.update(t1=t1, t2=t2, v1=values[0], v2=values[1])
                asked = frozenset({("attr", oid, t1), ("attr", oid, t2)})
                bindings.append(Binding(f, p, {}, asked, (ref,)))
            yield Site("verifyAttrs", f"{oid}:{t1}:{t2}", bindings)


# --------------------------------------------------------------------------
# existence and logic


def _exist_fields(s: GraphSites, concept: str, adj: str | None = None, oid: str | None = None) -> dict:
    words = f"{adj} {concept}" if adj else concept
    pl = plural(s.ont, concept)
    return {
        "obj": concept,
        "obj_a": s.a(concept, oid, words if adj else None),
        "obj_pl": ((f"{adj} {pl}" if adj else pl, oid),),
        "is": copula(s.ont, concept),
        "neg": s.negation(concept) if not adj else f"there {copula(s.ont, concept)} no {words}",
    }


def _exist_choice(s: GraphSites, oid: str) -> tuple[str, str | None, str | None]:
    """(concept, attribute filter, grounded id) for an existence question about ``oid``."""
    concept = s.concept(oid)
    adjs = [a for a in s.g.objects[oid].attributes if s.ont[a].category in ("color", "material")]
    if adjs and s.rng.random() < 0.4:
        return concept, s.rng.choice(adjs), oid
    return concept, None, oid


def _exist_prog(concept: str, adj: str | None) -> str:
    return f"select: {concept}" + (f"/filter: {adj}" if adj else "")


def bind_exist(s: GraphSites) -> Iterator[Site]:
    seen: set[str] = set()
    for oid in s.ids:
        concept = s.concept(oid)
        if concept in seen:
            continue
        seen.add(concept)
        if s.rng.random() < 0.5:
            c, adj, gid = _exist_choice(s, oid)
        else:
            c, adj, gid = s.absent_concept(oid), None, None
            if c is None:
                continue
        f = _exist_fields(s, c, adj, gid)
        yield Site("exist", f"{oid}:{c}", [Binding(f, {"obj": _exist_prog(c, adj)}, {}, frozenset(), (), gid)])


def _pair_fields(s: GraphSites, items) -> dict:
    f = {}
    for i, (c, adj, gid) in enumerate(items, 1):
        for k, v in _exist_fields(s, c, adj, gid).items():
            f[f"{k}{i}"] = v
    return f


def _logic_items(s: GraphSites, oid: str):
    """Two (concept, filter, id) existence items; the second may be absent."""
    first = _exist_choice(s, oid)
    if s.rng.random() < 0.5:
        others = [o for o in s.ids if s.concept(o) != s.concept(oid)]
        if not others:
            return None
        second = _exist_choice(s, s.rng.choice(others))
    else:
        c = s.absent_concept(oid)
        if c is None:
            return None
        second = (c, None, None)
    if s.rng.random() < 0.25:
        c = s.absent_concept(oid)
        if c is not None and c != second[0]:
            first = (c, None, None)
    items = [first, second]
    s.rng.shuffle(items)
    return items


def _present(s: GraphSites, item) -> bool:
    return item[2] is not None


def bind_logic(s: GraphSites, group: str) -> Iterator[Site]:
    seen: set[str] = set()
    for oid in s.ids:
        if s.concept(oid) in seen:
            continue
        seen.add(s.concept(oid))
        items = _logic_items(s, oid)
        if items is None or items[0][0] == items[1][0]:
            continue
        f = _pair_fields(s, items)
        present = [i for i, it in enumerate(items, 1) if _present(s, it)]
        absent = [i for i in (1, 2) if i not in present]
        first_present = present[0] if present else 1
        first_absent = absent[0] if absent else 1
        f.update(present_a=f[f"obj_a{first_present}"], present_is=f[f"is{first_present}"],
                 absent_neg=f[f"neg{first_absent}"])
        p = {"obj1": _exist_prog(items[0][0], items[0][1]), "obj2": _exist_prog(items[1][0], items[1][1])}
        yield Site(group, f"{oid}:{items[0][0]}:{items[1][0]}", [Binding(f, p, {}, frozenset(), ())])


def bind_exist_rel(s: GraphSites) -> Iterator[Site]:
    for r in s.relations():
        subj, anchor = r.subject, r.object
        concept = s.concept(subj)
        adj = None
        gid: str | None = subj
        if s.rng.random() < 0.5:
            c = s.decoy(anchor, Slot("relobj", predicate=r.predicate), concept)
            if c is not None:
                concept, gid = c, None
        if gid is not None:
            adjs = [a for a in s.g.objects[subj].attributes if s.ont[a].category == "color"]
            if adjs and s.rng.random() < 0.4:
                adj = adjs[0]
        bindings = []
        for ref in s.refs(anchor):
            if subj in ref.mentions and gid is not None:
                continue
            f, p = _ref_binding(ref)
            f.update(_exist_fields(s, concept, adj, gid))
            f["pred"] = r.predicate
            p.update(pred=r.predicate, obj=concept + (f"/filter: {adj}" if adj else ""))
            asked = frozenset({("relp", anchor, r.predicate)})
            bindings.append(Binding(f, p, {}, asked, (ref,), gid))
        yield Site("existRel", f"{subj}:{r.predicate}:{anchor}", bindings)


# --------------------------------------------------------------------------
# object and category questions


def _category_of(s: GraphSites, oid: str) -> str | None:
    cat = s.ont[s.concept(oid)].category
    return None if cat in ("object", s.ont.hierarchy.root) else cat


def _desc(ref: Reference) -> tuple[Phrase, str]:
    """Predicate phrase describing ``ref`` after "What kind of X", plus its copula.

    An inward clause "that the apple is on" becomes "is the apple on".
    """
    if ref.post:
        post = ref.post
        if post[0][0] == "that":
            cop, pred = post[-1][0].split(" ", 1)
            return post[1:-1] + ((pred, None),), cop
        return post, "is"
    if ref.adjs:
        return ((" ".join(ref.adjs), None),), "is"
    return (("in the picture", None),), "is"


def bind_query_object(s: GraphSites, group: str) -> Iterator[Site]:
    for oid in s.ids:
        cat = _category_of(s, oid)
        if cat is None:
            continue
        truth = s.concept(oid)
        a = b = None
        if group == "chooseObject":
            decoy = s.decoy(oid, Slot("name", cat), truth)
            if decoy is None:
                continue
            a, b = (truth, decoy) if s.rng.random() < 0.5 else (decoy, truth)
        bindings = []
        for ref in s.refs(oid, head=cat):
            f, p = _ref_binding(ref)
            desc, cop = _desc(ref)
            f.update(cat=cat, desc=desc, desc_is=cop, **{"is": "is"})
            if a is not None:
                f.update(a=a, b=b, a_a=s.a(a), b_a=s.a(b))
                p.update(a=a, b=b)
            bindings.append(Binding(f, p, {}, frozenset({("name", oid)}), (ref,), oid))
        yield Site(group, f"{oid}:{cat}", bindings)


# --------------------------------------------------------------------------
# relation questions


def bind_query_rel(s: GraphSites, group: str) -> Iterator[Site]:
    for r in s.relations():
        direction = "object" if s.rng.random() < 0.5 else "subject"
        anchor, answer = (r.subject, r.object) if direction == "object" else (r.object, r.subject)
        truth = s.concept(answer)
        a = b = None
        if group == "chooseObjRel":
            decoy = s.decoy(anchor, Slot("relobj", predicate=r.predicate), truth)
            if decoy is None:
                continue
            a, b = (truth, decoy) if s.rng.random() < 0.5 else (decoy, truth)
        bindings = []
        for ref in s.refs(anchor):
            if answer in ref.mentions:
                continue
            f, p = _ref_binding(ref)
            f.update(pred=r.predicate, **{"is": s.is_(anchor)})
            p.update(pred=r.predicate, dir=direction)
            if a is not None:
                f.update(a=a, b=b, a_a=s.a(a), b_a=s.a(b))
                p.update(a=a, b=b)
            asked = frozenset({("relp", anchor, r.predicate)})
            bindings.append(Binding(f, p, {"dir": direction}, asked, (ref,), answer))
        yield Site(group, f"{r.subject}:{r.predicate}:{r.object}:{direction}", bindings)


def bind_verify_rel(s: GraphSites) -> Iterator[Site]:
    for r in s.relations():
        obj = s.concept(r.object)
        gid: str | None = r.object
        if s.rng.random() < 0.5:
            decoy = s.decoy(r.subject, Slot("relobj", predicate=r.predicate), obj)
            if decoy is not None:
                obj, gid = decoy, None
        bindings = []
        for ref in s.refs(r.subject):
            if r.object in ref.mentions:
                continue
            f, p = _ref_binding(ref)
            f.update(pred=r.predicate, o_a=s.a(obj, gid), **{"is": s.is_(r.subject)})
            p.update(pred=r.predicate, o=obj)
            asked = frozenset({("relp", r.subject, r.predicate)})
            bindings.append(Binding(f, p, {}, asked, (ref,)))
        yield Site("verifyRel", f"{r.subject}:{r.predicate}:{r.object}", bindings)


SIDES = {"to the left of": "left", "to the right of": "right"}


def bind_choose_rel(s: GraphSites) -> Iterator[Site]:
    for r in s.relations(positional_share=0.3):
        obj = s.concept(r.object)
        if count_matching(s.g, obj, s.ont) != 1:
            continue
        decoy = s.ont.inverses.get(r.predicate)
        if decoy is None:
            decoy = s.decoy(r.subject, Slot("relation", obj), r.predicate)
        if decoy is None:
            continue
        r1, r2 = (r.predicate, decoy) if s.rng.random() < 0.5 else (decoy, r.predicate)
        kind = "sides" if r1 in SIDES and r2 in SIDES else "generic"
        bindings = []
        for ref in s.refs(r.subject):
            if r.object in ref.mentions:
                continue
            f, p = _ref_binding(ref)
            f.update(r1=r1, r2=r2, o_the=s.the(r.object), **{"is": s.is_(r.subject)})
            if kind == "sides":
                f.update(side1=SIDES[r1], side2=SIDES[r2])
            p.update(r1=r1, r2=r2, o=obj)
            asked = frozenset({("rel", *sorted((r.subject, r.object)))})
            bindings.append(Binding(f, p, {"pair": kind}, asked, (ref,)))
        yield Site("chooseRel", f"{r.subject}:{r.predicate}:{r.object}", bindings)


# --------------------------------------------------------------------------
# global questions


def bind_global(s: GraphSites, group: str) -> Iterator[Site]:
    for t in sorted(s.g.globals):
        truth = s.g.globals[t]
        f = {"type": t, "truth": truth, "truth_a": s.a(truth)}
        p = {"type": t}
        if group == "verifyGlobal":
            value = truth
            if s.rng.random() < 0.5:
                value = s.decoy(SCENE, Slot("global", t), truth) or truth
            f.update(value=value, value_a=s.a(value))
            p.update(value=value)
        elif group == "chooseGlobal":
            decoy = s.decoy(SCENE, Slot("global", t), truth)
            if decoy is None:
                continue
            a, b = (truth, decoy) if s.rng.random() < 0.5 else (decoy, truth)
            f.update(a=a, b=b, a_a=s.a(a), b_a=s.a(b))
            p.update(a=a, b=b)
        yield Site(group, t, [Binding(f, p, {"type": t}, frozenset(), ())])


# --------------------------------------------------------------------------
# comparisons


def bind_compare(s: GraphSites) -> Iterator[Site]:
    for x, y in s.pairs(share=0.5):
        if s.concept(x) == s.concept(y):
            continue
        for t in COMPARABLE_ORDERED:
            vx, vy = s.single_value(x, t), s.single_value(y, t)
            if vx is None or vy is None:
                continue
            rx, ry = s.ont.rank(t, vx), s.ont.rank(t, vy)
            if rx is None or ry is None or rx == ry or t not in s.ont.comparatives:
                continue
            more, less = s.ont.comparatives[t]
            word = more if s.rng.random() < 0.5 else less
            winner, loser = (x, y) if (rx > ry) == (word == more) else (y, x)
            people = all(s.ont.is_a(s.concept(o), "people") for o in (x, y))
            bindings = []
            for r1, r2 in s.ref_pairs(x, y):
                f = {"ref1": r1.phrase, "ref2": r2.phrase, "word": word, "type": t, "loser_the": s.the(loser)}
                p = {"ref1": r1.program, "ref2": r2.program, "type": t, "word": word}
                asked = frozenset({("attr", x, t), ("attr", y, t)})
                conds = {"people": "yes" if people else "no"}
                bindings.append(Binding(f, p, conds, asked, (r1, r2), winner))
            yield Site("compare", f"{x}:{y}:{t}", bindings)


def bind_common(s: GraphSites) -> Iterator[Site]:
    for x, y in s.pairs():
        types = [t for t in SAMENESS_TYPES if s.g.same(x, y, t) is not None]
        shared = [t for t in types if s.g.same(x, y, t)]
        if len(shared) != 1:
            continue
        bindings = []
        for r1, r2 in s.ref_pairs(x, y):
            f = {"ref1": r1.phrase, "ref2": r2.phrase}
            p = {"ref1": r1.program, "ref2": r2.program}
            asked = frozenset({("attr", x, shared[0]), ("attr", y, shared[0])})
            bindings.append(Binding(f, p, {}, asked, (r1, r2)))
        yield Site("common", f"{x}:{y}", bindings)


def bind_two(s: GraphSites, group: str) -> Iterator[Site]:
    for x, y in s.pairs():
        for t in SAMENESS_TYPES:
            if s.g.same(x, y, t) is None:
                continue
            vx, vy = s.single_value(x, t), s.single_value(y, t)
            bindings = []
            for r1, r2 in s.ref_pairs(x, y):
                v1, v2 = (vx, vy) if r1.target == x else (vy, vx)
                f = {"ref1": r1.phrase, "ref2": r2.phrase, "type": t, "type_pl": TYPE_PLURALS[t],
                     "v1": v1, "v2": v2, "is1": s.is_(r1.target), "is2": s.is_(r2.target)}
                p = {"ref1": r1.program, "ref2": r2.program, "type": t}
                asked = frozenset({("attr", x, t), ("attr", y, t)})
                bindings.append(Binding(f, p, {"type": t}, asked, (r1, r2)))
            yield Site(group, f"{x}:{y}:{t}", bindings)


def bind_all(s: GraphSites, group: str) -> Iterator[Site]:
    names = set()
    for o in s.g.objects.values():
        names.add(o.concept)
        names.update(n for n in s.ont.categories_of(o.concept) if n not in ("object", s.ont.hierarchy.root))
    for name in sorted(names):
        members = [o for o in s.ids if s.ont.is_a(s.concept(o), name)]
        if len(members) < 2:
            continue
        types = [t for t in SAMENESS_TYPES if all(s.single_value(o, t) for o in members)]
        if name not in s.ont.concepts:
            types.append("name")
        for t in types:
            f = {"set": name, "set_pl": plural(s.ont, name), "type": t, "type_pl": TYPE_PLURALS[t]}
            p = {"set": name, "type": t}
            yield Site(group, f"{name}:{t}", [Binding(f, p, {"type": t}, frozenset(), ())])


BINDERS: dict[str, Callable[[GraphSites], Iterator[Site]]] = {
    "queryGlobal": lambda s: bind_global(s, "queryGlobal"),
    "verifyGlobal": lambda s: bind_global(s, "verifyGlobal"),
    "chooseGlobal": lambda s: bind_global(s, "chooseGlobal"),
    "queryAttr": bind_query_attr,
    "verifyAttr": bind_verify_attr,
    "verifyAttrs": bind_verify_attrs,
    "chooseAttr": bind_choose_attr,
    "exist": bind_exist,
    "existRel": bind_exist_rel,
    "logicOr": lambda s: bind_logic(s, "logicOr"),
    "logicAnd": lambda s: bind_logic(s, "logicAnd"),
    "queryObject": lambda s: bind_query_object(s, "queryObject"),
    "chooseObject": lambda s: bind_query_object(s, "chooseObject"),
    "queryRel": lambda s: bind_query_rel(s, "queryRel"),
    "verifyRel": bind_verify_rel,
    "chooseRel": bind_choose_rel,
    "chooseObjRel": lambda s: bind_query_rel(s, "chooseObjRel"),
    "compare": bind_compare,
    "common": bind_common,
    "twoSame": lambda s: bind_two(s, "twoSame"),
    "twoDiff": lambda s: bind_two(s, "twoDiff"),
    "allSame": lambda s: bind_all(s, "allSame"),
    "allDiff": lambda s: bind_all(s, "allDiff"),
}
