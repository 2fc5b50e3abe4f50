"""Distractor selection for binary and choice questions.

A decoy differs from the truth, is not in the truth's exclusion set, has
co-occurred with the subject somewhere in the corpus, and is not actually
true in the graph.  Candidates are sampled in proportion to that
co-occurrence count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..ontology import SCENE, Ontology, PlausibilityTable
from ..scenegraph import ABSENT, SceneGraph, uniqueness


class NoDecoyAvailable(LookupError):
    pass


@dataclass(frozen=True)
class Slot:
    """What the decoy stands in for.

    kind is one of:
      ``attribute``  an attribute of type ``type`` on object ``subject``
      ``global``     the scene's ``type`` (weather/location)
      ``name``       the concept of object ``subject`` within category ``type``
      ``object``     an object concept that must be absent from the graph
      ``relobj``     the object of ``predicate`` from ``subject``; absent from the graph
      ``relation``   a predicate linking ``subject`` to objects of concept ``type``
    """

    kind: str
    type: str | None = None
    predicate: str | None = None


def _candidates(g: SceneGraph, subject: str, slot: Slot, truth: str, ontology: Ontology, unannotated) -> list[str]:
    if slot.kind in ("attribute", "global"):
        pool = ontology.members(slot.type, "attribute")
        true_here = set(g.objects[subject].attributes) if slot.kind == "attribute" else set(g.globals.values())
    elif slot.kind == "name":
        pool = ontology.members(slot.type or "object", "object")
        concept = g.objects[subject].concept
        true_here = {concept}
    elif slot.kind in ("object", "relobj"):
        pool = ontology.members(slot.type or "object", "object")
        true_here = {c for c in pool if uniqueness(g, c, ontology, unannotated) != ABSENT}
    elif slot.kind == "relation":
        pool = sorted(c for c, v in ontology.concepts.items() if v.kind == "relation")
        targets = {o for o in g.objects if ontology.is_a(g.objects[o].concept, slot.type)}
        true_here = {p for p, o in g.out_edges.get(subject, []) if o in targets}
    else:
        raise ValueError(f"unknown slot kind {slot.kind!r}")
    return [c for c in pool if c != truth and not ontology.excluded(truth, c) and c not in true_here]


def _subject_concept(g: SceneGraph, subject: str) -> str:
    if subject == SCENE:
        return SCENE
    return g.objects[subject].concept if subject in g.objects else subject


def decoy_weights(
    g: SceneGraph, subject: str, slot: Slot, truth: str, ontology: Ontology,
    table: PlausibilityTable, unannotated=(),
) -> dict[str, int]:
    """Plausibility weight of every admissible decoy (zero-weight ones dropped)."""
    subj = _subject_concept(g, subject)
    weights = {}
    for c in _candidates(g, subject, slot, truth, ontology, unannotated):
        w = table.count(subj, c)
        if slot.kind == "relobj":
            w = min(w, table.count(c, slot.predicate))
        if w > 0:
            weights[c] = w
    return weights


def select_decoy(
    g: SceneGraph, subject: str, slot: Slot, truth: str, rng: random.Random,
    ontology: Ontology, table: PlausibilityTable, unannotated=(),
) -> str:
    """Sample a decoy for ``truth``; raises :class:`NoDecoyAvailable`."""
    weights = decoy_weights(g, subject, slot, truth, ontology, table, unannotated)
    if not weights:
        raise NoDecoyAvailable(f"no decoy for {truth!r} in slot {slot.kind}:{slot.type}")
    names = sorted(weights)
    return rng.choices(names, weights=[weights[n] for n in names])[0]
