"""Concept vocabulary, class hierarchy and co-occurrence statistics.

An :class:`Ontology` is loaded from a directory of small CSV tables::

    concepts.csv       id,kind,category,synonyms,pos,plural,article
    hierarchy.csv      child,parent
    exclusions.csv     a,b            (unordered "too similar" pairs)
    typos.csv          typo,correction
    stopwords.txt      one word per line
    orders.csv         type,value,rank      (optional)
    comparatives.csv   type,more,less       (optional)
    inverses.csv       relation,inverse     (optional)

Synonyms inside ``concepts.csv`` are separated by ``;``.  Once loaded the
ontology is never mutated.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

KINDS = ("object", "attribute", "relation")
ARTICLES = ("a", "an", "none")

CONCEPT_FIELDS = ["id", "kind", "category", "synonyms", "pos", "plural", "article"]
HIERARCHY_FIELDS = ["child", "parent"]
EXCLUSION_FIELDS = ["a", "b"]
TYPO_FIELDS = ["typo", "correction"]
ORDER_FIELDS = ["type", "value", "rank"]
COMPARATIVE_FIELDS = ["type", "more", "less"]
INVERSE_FIELDS = ["relation", "inverse"]

# Subject used for scene-level (weather/location) facts.
SCENE = "scene"


class OntologyError(ValueError):
    """Raised for malformed or inconsistent ontology tables."""


@dataclass(frozen=True)
class Concept:
    id: str
    kind: str
    category: str
    synonyms: tuple[str, ...] = ()
    pos: str = ""
    plural: str | None = None
    article: str = "a"

    @property
    def plural_form(self) -> str:
        return self.plural or self.id


@dataclass(frozen=True)
class Hierarchy:
    parent: Mapping[str, str]
    root: str

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.parent) | {self.root}

    def ancestors(self, node: str) -> list[str]:
        """``node`` followed by every ancestor up to the root."""
        chain = [node]
        while node in self.parent:
            node = self.parent[node]
            chain.append(node)
        return chain

    def children(self, node: str) -> list[str]:
        return sorted(c for c, p in self.parent.items() if p == node)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "Hierarchy":
        parent: dict[str, str] = {}
        for child, par in pairs:
            if child in parent and parent[child] != par:
                raise OntologyError(f"hierarchy node {child!r} has two parents")
            if child == par:
                raise OntologyError(f"hierarchy cycle at {child!r}")
            parent[child] = par
        for start in parent:
            seen = {start}
            node = start
            while node in parent:
                node = parent[node]
                if node in seen:
                    raise OntologyError(f"hierarchy cycle through {start!r}")
                seen.add(node)
        roots = {p for p in parent.values() if p not in parent}
        if len(roots) != 1:
            raise OntologyError(f"hierarchy must have a single root, found {sorted(roots)}")
        return cls(parent=dict(parent), root=roots.pop())


@dataclass(frozen=True)
class Ontology:
    concepts: Mapping[str, Concept]
    hierarchy: Hierarchy
    exclusions: Mapping[str, frozenset[str]] = field(default_factory=dict)
    stopwords: frozenset[str] = frozenset()
    typos: Mapping[str, str] = field(default_factory=dict)
    orders: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    comparatives: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    inverses: Mapping[str, str] = field(default_factory=dict)
    surface: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        concepts: Iterable[Concept],
        hierarchy: Iterable[tuple[str, str]],
        exclusions: Iterable[tuple[str, str]] = (),
        stopwords: Iterable[str] = (),
        typos: Mapping[str, str] | None = None,
        orders: Mapping[str, Mapping[str, int]] | None = None,
        comparatives: Mapping[str, tuple[str, str]] | None = None,
        inverses: Mapping[str, str] | None = None,
    ) -> "Ontology":
        tree = Hierarchy.from_pairs(hierarchy)
        nodes = tree.nodes
        table: dict[str, Concept] = {}
        surface: dict[str, str] = {}
        for c in concepts:
            if c.id in table:
                raise OntologyError(f"duplicate concept id {c.id!r}")
            if c.kind not in KINDS:
                raise OntologyError(f"concept {c.id!r} has unknown kind {c.kind!r}")
            if c.article not in ARTICLES:
                raise OntologyError(f"concept {c.id!r} has unknown article {c.article!r}")
            if c.category not in nodes:
                raise OntologyError(f"dangling category {c.category!r} on concept {c.id!r}")
            if c.id in nodes:
                raise OntologyError(f"concept id {c.id!r} collides with a hierarchy node")
            table[c.id] = c
        for c in table.values():
            for s in (c.id, *c.synonyms):
                key = _squash(s)
                owner = surface.get(key)
                if owner is not None and owner != c.id:
                    raise OntologyError(f"synonym {s!r} maps to both {owner!r} and {c.id!r}")
                surface[key] = c.id

        excl: dict[str, set[str]] = {}
        for a, b in exclusions:
            for x in (a, b):
                if x not in table:
                    raise OntologyError(f"exclusion pair names unknown concept {x!r}")
            excl.setdefault(a, set()).add(b)
            excl.setdefault(b, set()).add(a)

        typo_map = {_squash(k): _squash(v) for k, v in (typos or {}).items()}
        order_map = {t: dict(v) for t, v in (orders or {}).items()}
        for t, values in order_map.items():
            for v in values:
                if v not in table:
                    raise OntologyError(f"order table names unknown concept {v!r}")
        inv = dict(inverses or {})
        for a, b in list(inv.items()):
            for x in (a, b):
                if x not in table or table[x].kind != "relation":
                    raise OntologyError(f"inverse table names unknown relation {x!r}")
            inv[b] = a
        return cls(
            concepts=table,
            hierarchy=tree,
            exclusions={k: frozenset(v) for k, v in excl.items()},
            stopwords=frozenset(w.lower() for w in stopwords),
            typos=typo_map,
            orders=order_map,
            comparatives=dict(comparatives or {}),
            inverses=inv,
            surface=surface,
        )

    # lookups ---------------------------------------------------------------

    def __contains__(self, cid: str) -> bool:
        return cid in self.concepts

    def __getitem__(self, cid: str) -> Concept:
        return self.concepts[cid]

    def lookup(self, text: str) -> str | None:
        return self.surface.get(_squash(text))

    def normalize_token(self, raw: str) -> str | None:
        """Map a free-form annotation token to a concept id, or ``None``.

        Lowercases, fixes typos word by word, consolidates synonyms and drops
        stop words.  Exact matches win before stop-word removal so that ids
        like ``to the left of`` survive.
        """
        words = _squash(raw).split()
        words = [self.typos.get(w, w) for w in words]
        text = " ".join(words)
        hit = self.typos.get(text, text)
        cid = self.surface.get(hit)
        if cid is not None:
            return cid
        kept = [w for w in words if w not in self.stopwords]
        if not kept:
            return None
        return self.surface.get(" ".join(kept))

    def is_known(self, name: str) -> bool:
        return name in self.concepts or name in self.hierarchy.nodes

    def is_a(self, cid: str, node: str) -> bool:
        """True when concept ``cid`` equals ``node`` or falls under category ``node``."""
        if cid == node:
            return True
        c = self.concepts.get(cid)
        if c is None:
            return False
        return node in self.hierarchy.ancestors(c.category)

    def categories_of(self, cid: str) -> list[str]:
        return self.hierarchy.ancestors(self.concepts[cid].category)

    def members(self, node: str, kind: str | None = None) -> list[str]:
        """Concept ids under hierarchy node ``node`` (sorted)."""
        return sorted(
            c.id for c in self.concepts.values()
            if (kind is None or c.kind == kind) and self.is_a(c.id, node)
        )

    def kind_of(self, cid: str) -> str | None:
        c = self.concepts.get(cid)
        return c.kind if c else None

    def attribute_type(self, cid: str) -> str:
        """The attribute-type category (color, material, ...) of an attribute."""
        c = self.concepts[cid]
        if c.kind != "attribute":
            raise OntologyError(f"{cid!r} is not an attribute")
        return c.category

    def excluded(self, a: str, b: str) -> bool:
        return b in self.exclusions.get(a, ())

    def rank(self, type_: str, value: str) -> int | None:
        return self.orders.get(type_, {}).get(value)

    def object_categories(self) -> list[str]:
        """Hierarchy nodes that hold objects, excluding the ``object`` root node."""
        out = set()
        for c in self.concepts.values():
            if c.kind == "object":
                out.update(self.hierarchy.ancestors(c.category))
        out.discard("object")
        out.discard(self.hierarchy.root)
        return sorted(out)


class PlausibilityTable:
    """Corpus co-occurrence counts keyed by ``(subject, value)``.

    Subjects and values are concept ids, hierarchy nodes, or :data:`SCENE`.
    """

    def __init__(self, ontology: Ontology, counts: Mapping[tuple[str, str], int] | None = None):
        self.ontology = ontology
        self.counts: Counter[tuple[str, str]] = Counter(counts or {})

    def add(self, subject: str, value: str, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counts must be non-negative")
        self.counts[(subject, value)] += n

    def count(self, subject: str, value: str) -> int:
        return self.counts.get((subject, value), 0)

    def _check(self, name: str) -> None:
        if name != SCENE and not self.ontology.is_known(name):
            raise OntologyError(f"unknown concept {name!r}")

    def plausible(self, subject: str, value: str) -> bool:
        self._check(subject)
        self._check(value)
        return self.count(subject, value) >= 1

    def __len__(self) -> int:
        return len(self.counts)


# --------------------------------------------------------------------------
# loading


def _squash(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower())


def _read_csv(path: Path, fields: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        unknown = [h for h in header if h not in fields]
        if unknown:
            raise OntologyError(f"{path.name}: unknown field(s) {unknown}")
        missing = [h for h in fields if h not in header]
        if missing:
            raise OntologyError(f"{path.name}: missing field(s) {missing}")
        return [{k: (v or "").strip() for k, v in row.items()} for row in reader]


def _concept_from_row(row: dict[str, str]) -> Concept:
    syns = tuple(s.strip() for s in row["synonyms"].split(";") if s.strip())
    return Concept(
        id=row["id"],
        kind=row["kind"],
        category=row["category"],
        synonyms=syns,
        pos=row["pos"],
        plural=row["plural"] or None,
        article=row["article"] or "a",
    )


def load_ontology(directory: str | Path) -> Ontology:
    """Load the CSV tables in ``directory`` into an :class:`Ontology`."""
    d = Path(directory)
    concepts = [_concept_from_row(r) for r in _read_csv(d / "concepts.csv", CONCEPT_FIELDS)]
    hierarchy = [(r["child"], r["parent"]) for r in _read_csv(d / "hierarchy.csv", HIERARCHY_FIELDS)]
    exclusions = []
    if (d / "exclusions.csv").exists():
        exclusions = [(r["a"], r["b"]) for r in _read_csv(d / "exclusions.csv", EXCLUSION_FIELDS)]
    typos = {}
    if (d / "typos.csv").exists():
        typos = {r["typo"]: r["correction"] for r in _read_csv(d / "typos.csv", TYPO_FIELDS)}
    stopwords: list[str] = []
    if (d / "stopwords.txt").exists():
        stopwords = [w.strip() for w in (d / "stopwords.txt").read_text().splitlines() if w.strip()]
    orders: dict[str, dict[str, int]] = {}
    if (d / "orders.csv").exists():
        for r in _read_csv(d / "orders.csv", ORDER_FIELDS):
            orders.setdefault(r["type"], {})[r["value"]] = int(r["rank"])
    comparatives = {}
    if (d / "comparatives.csv").exists():
        comparatives = {
            r["type"]: (r["more"], r["less"])
            for r in _read_csv(d / "comparatives.csv", COMPARATIVE_FIELDS)
        }
    inverses = {}
    if (d / "inverses.csv").exists():
        inverses = {r["relation"]: r["inverse"] for r in _read_csv(d / "inverses.csv", INVERSE_FIELDS)}
    return Ontology.build(
        concepts, hierarchy, exclusions, stopwords, typos, orders, comparatives, inverses
    )


def default_ontology_dir() -> Path:
    return Path(__file__).parent / "data" / "ontology"


def demo_ontology() -> Ontology:
    """The small ontology bundled with the package."""
    return load_ontology(default_ontology_dir())
