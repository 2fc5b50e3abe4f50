"""Scene-graph model and the normalization pipeline.

Raw records use the public scene-graph layout::

    {"imageId": "2370799", "width": 500, "height": 333,
     "weather": "sunny", "location": "street",            # optional
     "objects": {"1058498": {"name": "man", "x": 10, "y": 20, "w": 50, "h": 90,
                             "attributes": ["tall"],
                             "relations": [{"name": "holding", "object": "1058507"}]}}}

A record may also be wrapped as ``{"<imageId>": {...}}`` exactly as in the
released ``sceneGraphs.json`` files.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .ontology import SCENE, Ontology, PlausibilityTable

log = logging.getLogger(__name__)

LEFT_OF = "to the left of"
RIGHT_OF = "to the right of"
ABOVE = "above"
BELOW = "below"
POSITIONAL = frozenset({LEFT_OF, RIGHT_OF, ABOVE, BELOW})

POSITION_TAGS = ("left", "right", "top", "bottom", "middle")
GLOBAL_FIELDS = ("weather", "location")
EXCLUSIVE_TYPES = ("color", "material", "shape", "size", "height", "age")
SAMENESS_TYPES = ("color", "material", "shape")

RECORD_FIELDS = {"imageId", "width", "height", "objects", "weather", "location"}
OBJECT_FIELDS = {"name", "x", "y", "w", "h", "attributes", "relations", "positions"}
RELATION_FIELDS = {"name", "object"}

UNIQUE, MULTIPLE, ABSENT, UNKNOWN = "unique", "multiple", "absent", "unknown"


class GraphError(ValueError):
    """Malformed scene-graph record."""


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise GraphError(f"box must have positive size, got w={self.w} h={self.h}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> tuple[float, float]:
        return self.x + self.w / 2, self.y + self.h / 2


@dataclass(frozen=True)
class SGObject:
    id: str
    concept: str
    box: BoundingBox
    attributes: tuple[str, ...] = ()
    positions: tuple[str, ...] = ()

    def has(self, value: str) -> bool:
        return value in self.attributes or value in self.positions


@dataclass(frozen=True)
class SGRelation:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class SceneGraph:
    image_id: str
    width: float
    height: float
    objects: Mapping[str, SGObject]
    relations: tuple[SGRelation, ...] = ()
    globals: Mapping[str, str] = field(default_factory=dict)
    sameness: Mapping[tuple[str, str, str], bool] = field(default_factory=dict)
    dropped: int = 0

    @cached_property
    def out_edges(self) -> dict[str, list[tuple[str, str]]]:
        out: dict[str, list[tuple[str, str]]] = {}
        for r in self.relations:
            out.setdefault(r.subject, []).append((r.predicate, r.object))
        return out

    @cached_property
    def in_edges(self) -> dict[str, list[tuple[str, str]]]:
        inc: dict[str, list[tuple[str, str]]] = {}
        for r in self.relations:
            inc.setdefault(r.object, []).append((r.predicate, r.subject))
        return inc

    @cached_property
    def relation_set(self) -> frozenset[SGRelation]:
        return frozenset(self.relations)

    def has_relation(self, s: str, p: str, o: str) -> bool:
        return SGRelation(s, p, o) in self.relation_set

    def same(self, a: str, b: str, type_: str) -> bool | None:
        """Sameness flag for an object pair, ``None`` when not comparable."""
        key = (a, b, type_) if a <= b else (b, a, type_)
        return self.sameness.get(key)

    def values_of(self, obj_id: str, type_: str, ontology: Ontology) -> list[str]:
        return [a for a in self.objects[obj_id].attributes if ontology[a].category == type_]


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SceneConfig:
    blacklist: tuple[tuple[str, str, str], ...] = ()
    triggers: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    unannotated: frozenset[str] = frozenset()
    margin_fraction: float = 1 / 3


def load_scene_config(directory: str | Path, margin_fraction: float = 1 / 3) -> SceneConfig:
    d = Path(directory)
    blacklist: list[tuple[str, str, str]] = []
    if (d / "blacklist.csv").exists():
        with open(d / "blacklist.csv", newline="") as f:
            for row in csv.DictReader(f):
                blacklist.append((row["subject"].strip(), row["predicate"].strip(), row["object"].strip()))
    triggers: dict[str, tuple[str, str]] = {}
    if (d / "triggers.csv").exists():
        with open(d / "triggers.csv", newline="") as f:
            for row in csv.DictReader(f):
                triggers[row["concept"].strip()] = (row["field"].strip(), row["value"].strip())
    unannotated: frozenset[str] = frozenset()
    if (d / "unannotated.txt").exists():
        unannotated = frozenset(
            w.strip() for w in (d / "unannotated.txt").read_text().splitlines() if w.strip()
        )
    return SceneConfig(tuple(blacklist), triggers, unannotated, margin_fraction)


def default_scene_dir() -> Path:
    return Path(__file__).parent / "data" / "scene"


# --------------------------------------------------------------------------
# loading


def _unwrap(record: Mapping) -> dict:
    if "objects" in record:
        return dict(record)
    if len(record) == 1:
        (image_id, body), = record.items()
        if isinstance(body, Mapping) and "objects" in body:
            return {"imageId": image_id, **body}
    raise GraphError("record has no 'objects' field")


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GraphError(f"{what} must be a number, got {value!r}")
    return value


def load_graph(
    record: Mapping,
    ontology: Ontology,
    exclusive_types: Iterable[str] = EXCLUSIVE_TYPES,
) -> SceneGraph:
    """Build a raw :class:`SceneGraph`, normalizing every token.

    Unresolvable names, attributes and predicates are dropped and counted in
    ``SceneGraph.dropped``.  Annotated positional relations are discarded;
    :func:`augment_positions` recomputes them from the boxes.
    """
    rec = _unwrap(record)
    unknown = set(rec) - RECORD_FIELDS
    if unknown:
        raise GraphError(f"unknown record field(s) {sorted(unknown)}")
    for key in ("imageId", "width", "height", "objects"):
        if key not in rec:
            raise GraphError(f"record is missing {key!r}")
    image_id = str(rec["imageId"])
    width = _number(rec["width"], "width")
    height = _number(rec["height"], "height")
    if width <= 0 or height <= 0:
        raise GraphError(f"image {image_id}: non-positive extent")
    raw_objects = rec["objects"]
    if not isinstance(raw_objects, Mapping):
        raise GraphError(f"image {image_id}: 'objects' must be a mapping")
    exclusive = set(exclusive_types)

    dropped = 0
    objects: dict[str, SGObject] = {}
    for oid, body in raw_objects.items():
        oid = str(oid)
        if not isinstance(body, Mapping):
            raise GraphError(f"image {image_id}: object {oid} is not a mapping")
        extra = set(body) - OBJECT_FIELDS
        if extra:
            raise GraphError(f"image {image_id}: object {oid} has unknown field(s) {sorted(extra)}")
        for key in ("name", "x", "y", "w", "h"):
            if key not in body:
                raise GraphError(f"image {image_id}: object {oid} is missing {key!r}")
        for rel in body.get("relations", []):
            if set(rel) - RELATION_FIELDS or "name" not in rel or "object" not in rel:
                raise GraphError(f"image {image_id}: object {oid} has a malformed relation {rel!r}")
            if str(rel["object"]) not in {str(k) for k in raw_objects}:
                raise GraphError(
                    f"image {image_id}: dangling endpoint {rel['object']!r} in relation of {oid}"
                )
        concept = ontology.normalize_token(str(body["name"]))
        if concept is None or ontology[concept].kind != "object":
            dropped += 1
            continue
        x = _number(body["x"], "x")
        y = _number(body["y"], "y")
        x0, y0 = max(0, x), max(0, y)
        x1 = min(width, x + _number(body["w"], "w"))
        y1 = min(height, y + _number(body["h"], "h"))
        if x1 <= x0 or y1 <= y0:
            dropped += 1
            continue
        box = BoundingBox(x0, y0, x1 - x0, y1 - y0)
        attrs: list[str] = []
        seen_types: set[str] = set()
        for raw in body.get("attributes", []):
            a = ontology.normalize_token(str(raw))
            if a is None or ontology[a].kind != "attribute" or ontology[a].category == "position":
                dropped += 1
                continue
            if a in attrs:
                continue
            t = ontology[a].category
            if t in exclusive and t in seen_types:
                log.warning("image %s: object %s has a second %s (%s); keeping the first", image_id, oid, t, a)
                continue
            seen_types.add(t)
            attrs.append(a)
        objects[oid] = SGObject(oid, concept, box, tuple(attrs))

    relations: list[SGRelation] = []
    seen: set[SGRelation] = set()
    for oid, body in raw_objects.items():
        oid = str(oid)
        for rel in body.get("relations", []):
            target = str(rel["object"])
            pred = ontology.normalize_token(str(rel["name"]))
            if oid not in objects or target not in objects:
                dropped += 1
                continue
            if pred is None or ontology[pred].kind != "relation":
                dropped += 1
                continue
            if pred in POSITIONAL or oid == target:
                continue
            r = SGRelation(oid, pred, target)
            if r not in seen:
                seen.add(r)
                relations.append(r)

    globs: dict[str, str] = {}
    for name in GLOBAL_FIELDS:
        if rec.get(name):
            v = ontology.normalize_token(str(rec[name]))
            if v is not None and ontology[v].kind == "attribute" and ontology[v].category == name:
                globs[name] = v
            else:
                dropped += 1
    return SceneGraph(image_id, width, height, objects, tuple(relations), globs, {}, dropped)


# --------------------------------------------------------------------------
# normalization steps


def _matches(ontology: Ontology, pattern: str, cid: str) -> bool:
    return pattern == "*" or ontology.is_a(cid, pattern)


def prune_edges(g: SceneGraph, blacklist: Iterable[tuple[str, str, str]], ontology: Ontology) -> SceneGraph:
    """Remove relations matching a blacklisted triplet.

    Rule endpoints may be concept ids, category names (matching every
    descendant) or ``*``.
    """
    rules = list(blacklist)
    if not rules:
        return g
    kept = []
    for r in g.relations:
        s, o = g.objects[r.subject].concept, g.objects[r.object].concept
        if any(
            _matches(ontology, rs, s) and (rp == "*" or rp == r.predicate) and _matches(ontology, ro, o)
            for rs, rp, ro in rules
        ):
            continue
        kept.append(r)
    return replace(g, relations=tuple(kept))


def position_tags(box: BoundingBox, width: float, height: float, margin_fraction: float) -> tuple[str, ...]:
    cx, cy = box.center
    tags = []
    if cx <= margin_fraction * width:
        tags.append("left")
    elif cx >= (1 - margin_fraction) * width:
        tags.append("right")
    if cy <= margin_fraction * height:
        tags.append("top")
    elif cy >= (1 - margin_fraction) * height:
        tags.append("bottom")
    return tuple(tags) or ("middle",)


def augment_positions(g: SceneGraph, margin_fraction: float = 1 / 3) -> SceneGraph:
    """Tag absolute positions and add box-derived relative relations.

    ``a`` is to the left of ``b`` only when a's horizontal interval ends
    before b's begins; likewise for above/below.  Each added relation comes
    with its inverse.
    """
    if not 0 < margin_fraction <= 0.5:
        raise ValueError(f"margin_fraction must lie in (0, 0.5], got {margin_fraction}")
    objects = {
        oid: replace(o, positions=position_tags(o.box, g.width, g.height, margin_fraction))
        for oid, o in g.objects.items()
    }
    relations = [r for r in g.relations if r.predicate not in POSITIONAL]
    ids = sorted(objects)
    for a, b in itertools.permutations(ids, 2):
        ba, bb = objects[a].box, objects[b].box
        if ba.x2 <= bb.x:
            relations += [SGRelation(a, LEFT_OF, b), SGRelation(b, RIGHT_OF, a)]
        if ba.y2 <= bb.y:
            relations += [SGRelation(a, ABOVE, b), SGRelation(b, BELOW, a)]
    return replace(g, objects=objects, relations=tuple(_dedupe(relations)))


def close_inverses(g: SceneGraph, ontology: Ontology) -> SceneGraph:
    """Add ``(o, inv(p), s)`` for every ``(s, p, o)`` whose predicate has an inverse."""
    relations = list(g.relations)
    for r in g.relations:
        inv = ontology.inverses.get(r.predicate)
        if inv is not None:
            relations.append(SGRelation(r.object, inv, r.subject))
    return replace(g, relations=tuple(_dedupe(relations)))


def _dedupe(relations: Iterable[SGRelation]) -> list[SGRelation]:
    seen: set[SGRelation] = set()
    out = []
    for r in relations:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def augment_sameness(g: SceneGraph, ontology: Ontology, types: Iterable[str] = SAMENESS_TYPES) -> SceneGraph:
    """Record same/different flags for every object pair and comparable type."""
    types = tuple(types)
    flags: dict[tuple[str, str, str], bool] = {}
    values = {
        oid: {ontology[a].category: a for a in o.attributes if ontology[a].category in types}
        for oid, o in g.objects.items()
    }
    for a, b in itertools.combinations(sorted(g.objects), 2):
        for t in types:
            va, vb = values[a].get(t), values[b].get(t)
            if va is not None and vb is not None:
                flags[(a, b, t)] = va == vb
    return replace(g, sameness=flags)


def infer_globals(g: SceneGraph, triggers: Mapping[str, tuple[str, str]]) -> SceneGraph:
    """Fill weather/location when the objects trigger exactly one value."""
    candidates: dict[str, set[str]] = {}
    for o in g.objects.values():
        hit = triggers.get(o.concept)
        if hit is not None:
            candidates.setdefault(hit[0], set()).add(hit[1])
    globs = dict(g.globals)
    for name, vals in candidates.items():
        if name not in globs and len(vals) == 1:
            globs[name] = next(iter(vals))
    return replace(g, globals=globs)


def count_matching(g: SceneGraph, name: str, ontology: Ontology) -> int:
    return sum(1 for o in g.objects.values() if ontology.is_a(o.concept, name))


def uniqueness(g: SceneGraph, name: str, ontology: Ontology, unannotated: Iterable[str] = ()) -> str:
    """Classify how many instances of a concept or category the graph holds.

    ``absent`` is only returned for concepts that annotators reliably mark;
    anything on the ``unannotated`` list (or under a listed category) with no
    instance is ``unknown``.
    """
    if not ontology.is_known(name):
        raise KeyError(f"unknown concept {name!r}")
    n = count_matching(g, name, ontology)
    if n == 1:
        return UNIQUE
    if n > 1:
        return MULTIPLE
    unannotated = set(unannotated)
    chain = [name] + (ontology.categories_of(name) if name in ontology.concepts else ontology.hierarchy.ancestors(name))
    if unannotated.intersection(chain):
        return UNKNOWN
    return ABSENT


def normalize(record: Mapping, ontology: Ontology, config: SceneConfig) -> SceneGraph:
    """Run the full normalization pipeline on one raw record."""
    g = load_graph(record, ontology)
    g = prune_edges(g, config.blacklist, ontology)
    g = close_inverses(g, ontology)
    g = augment_positions(g, config.margin_fraction)
    g = augment_sameness(g, ontology)
    g = infer_globals(g, config.triggers)
    return g


# --------------------------------------------------------------------------
# serialization and corpus helpers


def graph_to_record(g: SceneGraph) -> dict:
    objects = {}
    for oid, o in g.objects.items():
        objects[oid] = {
            "name": o.concept,
            "x": o.box.x,
            "y": o.box.y,
            "w": o.box.w,
            "h": o.box.h,
            "attributes": list(o.attributes),
            "relations": [{"name": p, "object": t} for p, t in g.out_edges.get(oid, [])],
            "positions": list(o.positions),
        }
    rec: dict = {"imageId": g.image_id, "width": g.width, "height": g.height}
    for name in GLOBAL_FIELDS:
        if name in g.globals:
            rec[name] = g.globals[name]
    rec["objects"] = objects
    return rec


def _no_duplicate_keys(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise GraphError(f"duplicate key {k!r}")
        out[k] = v
    return out


def parse_record(line: str) -> dict:
    try:
        return json.loads(line, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as e:
        raise GraphError(f"malformed record: {e}") from None


def iter_records(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                yield parse_record(line)


def read_graphs(path: str | Path, ontology: Ontology, config: SceneConfig) -> list[SceneGraph]:
    graphs = []
    for rec in iter_records(path):
        try:
            graphs.append(normalize(rec, ontology, config))
        except GraphError as e:
            image = rec.get("imageId") if isinstance(rec, dict) else None
            raise GraphError(f"graph {image}: {e}") from None
    return graphs


def build_plausibility(graphs: Iterable[SceneGraph], ontology: Ontology) -> PlausibilityTable:
    """One pass over the corpus collecting subject/value co-occurrences.

    For each object of concept ``c`` (and each category above it) we count
    the concept itself, its attributes and their types, every object it is
    related to in either direction, and the predicates it takes part in.
    Scene-level facts are counted under :data:`SCENE`.
    """
    table = PlausibilityTable(ontology)
    for g in graphs:
        for o in g.objects.values():
            subjects = [o.concept] + ontology.categories_of(o.concept)
            for s in subjects:
                table.add(s, o.concept)
                for a in o.attributes:
                    table.add(s, a)
                    table.add(s, ontology[a].category)
        for r in g.relations:
            s, t = g.objects[r.subject].concept, g.objects[r.object].concept
            for subj in [s] + ontology.categories_of(s):
                table.add(subj, t)
                table.add(subj, r.predicate)
            for subj in [t] + ontology.categories_of(t):
                table.add(subj, s)
                table.add(subj, r.predicate)
        for v in g.globals.values():
            table.add(SCENE, v)
    return table
