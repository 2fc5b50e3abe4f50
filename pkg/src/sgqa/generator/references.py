"""Direct and indirect noun-phrase references to scene-graph objects.

Every reference carries the select/filter/relate chain that picks out its
target, and is only kept when that chain resolves to exactly the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..ontology import Ontology
from ..program import Step, resolve, serialize_step
from ..scenegraph import SceneGraph
from .text import Phrase, copula

POSITION_PHRASES = {
    "left": "on the left",
    "right": "on the right",
    "top": "at the top",
    "bottom": "at the bottom",
    "middle": "in the middle",
}

# Attribute types usable as prenominal modifiers.
MODIFIER_TYPES = ("size", "height", "age", "color", "material", "shape", "activity")

MAX_REFS = 12
SUBREFS_PER_NEIGHBOUR = 2


@dataclass(frozen=True)
class Reference:
    target: str
    kind: str  # "direct" or "indirect"
    head: str
    adjs: tuple[str, ...]
    post: Phrase
    prefix: tuple[Step, ...]
    facts: frozenset
    hops: int = 0

    @property
    def noun(self) -> str:
        return " ".join((*self.adjs, self.head))

    @property
    def phrase(self) -> Phrase:
        return (("the " + self.noun, self.target),) + self.post

    @property
    def surface(self) -> str:
        return " ".join(text for text, _ in self.phrase)

    @property
    def program(self) -> str:
        return "/".join(serialize_step(s) for s in self.prefix)

    @property
    def mentions(self) -> frozenset[str]:
        return frozenset(oid for _, oid in self.phrase if oid is not None)

    @property
    def post_text(self) -> str:
        return " ".join(text for text, _ in self.post)


def _order_adjs(ontology: Ontology, adjs) -> tuple[str, ...]:
    rank = {t: i for i, t in enumerate(MODIFIER_TYPES)}
    return tuple(sorted(adjs, key=lambda a: rank.get(ontology[a].category, 99)))


class ReferenceBuilder:
    """Builds and memoizes references for the objects of one graph."""

    def __init__(self, g: SceneGraph, ontology: Ontology):
        self.g = g
        self.ont = ontology
        self._memo: dict[tuple[str, int, str | None], list[Reference]] = {}

    def _unique(self, steps: tuple[Step, ...], target: str) -> bool:
        return resolve(steps, self.g, self.ont) == frozenset({target})

    def _modifier_sets(self, target: str) -> list[tuple[tuple[str, ...], str | None]]:
        o = self.g.objects[target]
        adjs = [a for a in o.attributes if self.ont[a].category in MODIFIER_TYPES]
        out: list[tuple[tuple[str, ...], str | None]] = [((), None)]
        out += [((a,), None) for a in adjs]
        out += [((), p) for p in o.positions]
        out += [(pair, None) for pair in itertools.combinations(adjs, 2)]
        return out

    def local(self, target: str, head: str) -> list[Reference]:
        """References using only the head noun, attribute and position filters."""
        refs = []
        for adjs, pos in self._modifier_sets(target):
            steps = (Step("select", operands=(head,)),)
            steps += tuple(Step("filter", operands=(a,)) for a in adjs)
            facts = {("attr", target, self.ont[a].category) for a in adjs}
            post: Phrase = ()
            if pos is not None:
                steps += (Step("filter", operands=(pos,)),)
                facts.add(("attr", target, "position"))
                post = ((POSITION_PHRASES[pos], None),)
            if self._unique(steps, target):
                kind = "direct" if not adjs and pos is None else "indirect"
                refs.append(Reference(target, kind, head, _order_adjs(self.ont, adjs), post, steps, frozenset(facts)))
        return refs

    def build(self, target: str, max_depth: int = 2, head: str | None = None) -> list[Reference]:
        head = head or self.g.objects[target].concept
        key = (target, max_depth, head)
        if key in self._memo:
            return self._memo[key]
        refs = self.local(target, head)
        if max_depth > 0:
            refs += self._relational(target, max_depth, head)
        refs.sort(key=lambda r: (r.hops, len(r.prefix), r.surface))
        seen: set[str] = set()
        out = []
        for r in refs:
            if r.surface not in seen:
                seen.add(r.surface)
                out.append(r)
        out = out[:MAX_REFS]
        self._memo[key] = out
        return out

    def _relational(self, target: str, max_depth: int, head: str) -> list[Reference]:
        g = self.g
        refs = []
        hops = [(p, other, "subject") for p, other in g.out_edges.get(target, [])]
        hops += [(p, other, "object") for p, other in g.in_edges.get(target, [])]
        for p, other, direction in sorted(hops):
            if other == target:
                continue
            if direction == "object" and p in self.ont.inverses:
                # the inverse edge already gives the natural phrasing
                continue
            subs = [r for r in self.build(other, max_depth - 1) if target not in r.mentions]
            for sub in subs[:SUBREFS_PER_NEIGHBOUR]:
                steps = sub.prefix + (Step("relate", operands=(head,), direction=direction, relations=(p,)),)
                if not self._unique(steps, target):
                    continue
                s, o = (target, other) if direction == "subject" else (other, target)
                facts = set(sub.facts) | {("rel", *sorted((s, o))), ("relp", s, p), ("relp", o, p)}
                if direction == "subject":
                    post: Phrase = ((p, None),) + sub.phrase
                else:
                    post = (("that", None),) + sub.phrase + ((f"{copula(self.ont, g.objects[other].concept)} {p}", None),)
                refs.append(Reference(target, "indirect", head, (), post, steps, frozenset(facts), sub.hops + 1))
        return refs


def build_references(
    g: SceneGraph, target: str, ontology: Ontology, max_depth: int = 2, head: str | None = None
) -> list[Reference]:
    """All unambiguous references to ``target`` with up to ``max_depth`` relation hops.

    ``head`` swaps the head noun for a category (``the fruit on the table``).
    """
    return ReferenceBuilder(g, ontology).build(target, max_depth, head)
