"""Evaluation of predictions against a gold corpus.

Predictions are records ``{questionId, answer, attention?}``.  Attention is
either a map from object id to probability mass or ``{"grid": rows}`` with
a row-major grid of masses laid over the image.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .labels import main_subject
from .ontology import SCENE, Ontology, OntologyError, PlausibilityTable
from .program import BINARY_TYPES, CATALOG, WILDCARD, build_tree, parse_program
from .scenegraph import SAMENESS_TYPES, SceneGraph

EPSILON = 0.5
MASS_TOLERANCE = 1e-6

STRUCTURAL = ("verify", "query", "choose", "logical", "compare")
SEMANTIC = ("global", "object", "attribute", "relation", "category")

# Row order of the printed report.
ROWS = (
    ("Open", "open"), ("Binary", "binary"), ("Query", "query"), ("Compare", "compare"),
    ("Choose", "choose"), ("Logical", "logical"), ("Verify", "verify"), ("Global", "global"),
    ("Object", "object"), ("Attribute", "attribute"), ("Relation", "relation"), ("Category", "category"),
    ("Distribution", "distribution"), ("Grounding", "grounding"), ("Validity", "validity"),
    ("Plausibility", "plausibility"), ("Consistency", "consistency"), ("Accuracy", "accuracy"),
)


class MetricError(ValueError):
    pass


def normalize_answer(text: str) -> str:
    return str(text).strip().lower()


def _index_predictions(preds: Iterable[Mapping], gold: Mapping[str, Mapping]) -> dict[str, Mapping]:
    out: dict[str, Mapping] = {}
    for p in preds:
        qid = p["questionId"]
        if qid not in gold:
            raise MetricError(f"prediction for unknown question {qid}")
        if qid in out:
            raise MetricError(f"duplicate prediction for question {qid}")
        out[qid] = p
    return out


def _correct(pred: Mapping | None, answer: str) -> bool:
    return pred is not None and normalize_answer(pred["answer"]) == normalize_answer(answer)


def _pct(num: float, den: int) -> float | None:
    return None if den == 0 else 100.0 * num / den


# --------------------------------------------------------------------------
# accuracy


def accuracy(preds: Mapping[str, Mapping], gold: Sequence[Mapping]) -> dict:
    """Overall, binary/open, structural, semantic and detailed accuracies (percent)."""
    hits: Counter = Counter()
    totals: Counter = Counter()
    for g in gold:
        ok = _correct(preds.get(g["questionId"]), g["answer"])
        detailed = g["types"]["detailed"]
        buckets = [
            "accuracy",
            "binary" if detailed in BINARY_TYPES else "open",
            g["types"]["structural"],
            g["types"]["semantic"],
            f"detailed:{detailed}",
        ]
        for b in buckets:
            totals[b] += 1
            hits[b] += ok
    out = {b: _pct(hits[b], totals[b]) for b in totals}
    return {k: out[k] for k in sorted(out)}


# --------------------------------------------------------------------------
# consistency


def consistency(
    preds: Mapping[str, Mapping], gold: Sequence[Mapping], entailments: Iterable[Mapping]
) -> float | None:
    """Mean accuracy over posed entailed questions, for questions answered correctly."""
    by_key: dict[tuple[str, str], list[str]] = defaultdict(list)
    for g in gold:
        by_key[(g["imageId"], g["semantic"])].append(g["questionId"])
    gold_by_id = {g["questionId"]: g for g in gold}
    scores = []
    for item in entailments:
        src = gold_by_id.get(item["questionId"])
        if src is None or not _correct(preds.get(src["questionId"]), src["answer"]):
            continue
        checks = []
        for m in item["entailed"]:
            for qid in by_key.get((src["imageId"], m["semantic"]), ()):
                checks.append(_correct(preds.get(qid), m["answer"]))
        if checks:
            scores.append(sum(checks) / len(checks))
    return None if not scores else 100.0 * sum(scores) / len(scores)


# --------------------------------------------------------------------------
# validity and plausibility


@dataclass
class Scope:
    """Valid answers of one question: a fixed set or every concept of one kind."""

    values: frozenset[str] = frozenset()
    kind: str | None = None
    ontology: Ontology | None = field(default=None, repr=False)

    def __contains__(self, answer: str) -> bool:
        if answer in self.values:
            return True
        if self.kind is not None and self.ontology is not None:
            return self.ontology.kind_of(answer) == self.kind
        return False


def answer_scope(record: Mapping, ontology: Ontology) -> Scope:
    """The answers that are in scope for a question's answer type."""
    detailed = record["types"]["detailed"]
    if detailed in BINARY_TYPES:
        return Scope(frozenset({"yes", "no"}))
    program = parse_program(record["semantic"])
    last = program.steps[-1]
    if detailed in ("queryAttr", "queryGlobal", "chooseAttr", "chooseGlobal"):
        return Scope(frozenset(ontology.members(last.type_arg, "attribute")))
    if detailed in ("queryObject", "chooseObject"):
        root = build_tree(program)
        names = [s.operands[0] for s in root.chain if s.op in ("select", "relate")]
        return Scope(frozenset(ontology.members(names[-1], "object")))
    if detailed in ("queryRel", "chooseObjRel", "compare"):
        return Scope(kind="object", ontology=ontology)
    if detailed == "chooseRel":
        return Scope(kind="relation", ontology=ontology)
    if detailed == "common":
        return Scope(frozenset(SAMENESS_TYPES))
    raise MetricError(f"no answer scope for {detailed}")


def _compared(record: Mapping) -> frozenset[str]:
    root = build_tree(parse_program(record["semantic"]))
    out = set()
    for child in root.children:
        names = [s.operands[0] for s in _chain(child) if s.op in ("select", "relate") and s.operands[0] != WILDCARD]
        if names:
            out.add(names[-1])
    return frozenset(out)


def _chain(node) -> list:
    out = []
    while node is not None:
        out.append(node.step)
        node = node.children[0] if node.children else None
    return out[::-1]


def is_plausible(record: Mapping, answer: str, ontology: Ontology, table: PlausibilityTable) -> bool:
    """In scope and seen with the question's subject somewhere in the corpus."""
    answer = normalize_answer(answer)
    if answer not in answer_scope(record, ontology):
        return False
    detailed = record["types"]["detailed"]
    if detailed in BINARY_TYPES:
        return True
    if detailed == "compare":
        return any(ontology.is_a(c, answer) or c == answer for c in _compared(record))
    subject = main_subject(parse_program(record["semantic"]))
    if detailed in ("queryGlobal", "chooseGlobal"):
        subject = SCENE
    try:
        return table.plausible(subject, answer)
    except OntologyError:
        return False


def validity(preds: Mapping[str, Mapping], gold: Sequence[Mapping], ontology: Ontology) -> float | None:
    scored = [g for g in gold if g["questionId"] in preds]
    valid = sum(normalize_answer(preds[g["questionId"]]["answer"]) in answer_scope(g, ontology) for g in scored)
    return _pct(valid, len(scored))


def plausibility(
    preds: Mapping[str, Mapping], gold: Sequence[Mapping], ontology: Ontology, table: PlausibilityTable
) -> float | None:
    scored = [g for g in gold if g["questionId"] in preds]
    ok = sum(is_plausible(g, preds[g["questionId"]]["answer"], ontology, table) for g in scored)
    return _pct(ok, len(scored))


# --------------------------------------------------------------------------
# distribution


def chi_square(gold: Mapping[str, float], pred: Mapping[str, float], epsilon: float = EPSILON) -> float:
    """Sum over answers of (pred - gold)^2 / max(gold, epsilon), pred rescaled to the gold total."""
    g_total = sum(gold.values())
    p_total = sum(pred.values())
    scale = g_total / p_total if p_total > 0 else 0.0
    score = 0.0
    for a in sorted(set(gold) | set(pred)):
        g = gold.get(a, 0)
        p = pred.get(a, 0) * scale
        score += (p - g) ** 2 / max(g, epsilon)
    return score


def distribution(preds: Mapping[str, Mapping], gold: Sequence[Mapping]) -> float | None:
    """Mean chi-square over global groups with at least two distinct gold answers."""
    g_counts: dict[str, Counter] = defaultdict(Counter)
    p_counts: dict[str, Counter] = defaultdict(Counter)
    for g in gold:
        group = g["groups"]["global"]
        g_counts[group][normalize_answer(g["answer"])] += 1
        p = preds.get(g["questionId"])
        if p is not None:
            p_counts[group][normalize_answer(p["answer"])] += 1
    scores = [chi_square(g_counts[k], p_counts[k]) for k in sorted(g_counts) if len(g_counts[k]) >= 2]
    return None if not scores else sum(scores) / len(scores)


# --------------------------------------------------------------------------
# grounding


def pointers(record: Mapping) -> frozenset[str]:
    ann = record.get("annotations") or {}
    out = set()
    for part in ("question", "answer", "fullAnswer"):
        out.update((ann.get(part) or {}).values())
    return frozenset(out)


def _union_area(rects: list[tuple[float, float, float, float]]) -> float:
    """Area of the union of axis-aligned rectangles (x1, y1, x2, y2)."""
    rects = [r for r in rects if r[2] > r[0] and r[3] > r[1]]
    if not rects:
        return 0.0
    xs = sorted({x for r in rects for x in (r[0], r[2])})
    area = 0.0
    for x1, x2 in zip(xs, xs[1:]):
        spans = sorted((r[1], r[3]) for r in rects if r[0] <= x1 and r[2] >= x2)
        covered, end = 0.0, None
        for y1, y2 in spans:
            if end is None or y1 > end:
                covered += y2 - y1
                end = y2
            elif y2 > end:
                covered += y2 - end
                end = y2
        area += covered * (x2 - x1)
    return area


def grid_mass(grid: Sequence[Sequence[float]], boxes: list[tuple[float, float, float, float]],
              width: float, height: float) -> float:
    """Attention mass on the union of ``boxes``, each cell weighted by its covered fraction."""
    rows = len(grid)
    total = 0.0
    for i, row in enumerate(grid):
        cols = len(row)
        ch, cw = height / rows, width / cols
        for j, mass in enumerate(row):
            if mass == 0:
                continue
            cell = (j * cw, i * ch, (j + 1) * cw, (i + 1) * ch)
            clipped = [
                (max(b[0], cell[0]), max(b[1], cell[1]), min(b[2], cell[2]), min(b[3], cell[3])) for b in boxes
            ]
            total += mass * _union_area(clipped) / (cw * ch)
    return total


def _masses(att: Mapping) -> list[float]:
    if "grid" in att:
        return [x for row in att["grid"] for x in row]
    return list(att.values())


def grounding(
    preds: Mapping[str, Mapping], gold: Sequence[Mapping], graphs: Mapping[str, SceneGraph] | None = None
) -> float | None:
    scores = []
    for g in gold:
        p = preds.get(g["questionId"])
        if p is None or not p.get("attention"):
            continue
        att = p["attention"]
        masses = _masses(att)
        if any(v < 0 for v in masses):
            raise MetricError(f"question {g['questionId']}: negative attention mass")
        total = sum(masses)
        if total > 1 + MASS_TOLERANCE:
            raise MetricError(f"question {g['questionId']}: attention sums to {total:.6f} > 1")
        ptrs = pointers(g)
        if not ptrs:
            continue
        if "grid" in att:
            graph = (graphs or {}).get(g["imageId"])
            if graph is None:
                raise MetricError(f"question {g['questionId']}: grid attention needs graph {g['imageId']}")
            boxes = [
                (o.box.x, o.box.y, o.box.x2, o.box.y2) for oid, o in graph.objects.items() if oid in ptrs
            ]
            scores.append(grid_mass(att["grid"], boxes, graph.width, graph.height))
        else:
            scores.append(sum(m for oid, m in att.items() if oid in ptrs))
    return None if not scores else 100.0 * sum(scores) / len(scores)


# --------------------------------------------------------------------------
# report


def evaluate(
    predictions: Iterable[Mapping], gold: Sequence[Mapping], ontology: Ontology, table: PlausibilityTable,
    entailments: Iterable[Mapping] | None = None, graphs: Mapping[str, SceneGraph] | None = None,
) -> dict:
    """Machine-readable report with every metric; absent metrics are ``None``."""
    gold_by_id = {g["questionId"]: g for g in gold}
    preds = _index_predictions(predictions, gold_by_id)
    acc = accuracy(preds, gold)
    report = {
        "questions": len(gold),
        "predictions": len(preds),
        "accuracy": acc.get("accuracy"),
        "binary": acc.get("binary"),
        "open": acc.get("open"),
    }
    for key in STRUCTURAL + SEMANTIC:
        report[key] = acc.get(key)
    report["detailed"] = {k.split(":", 1)[1]: v for k, v in acc.items() if k.startswith("detailed:")}
    report["consistency"] = consistency(preds, gold, entailments) if entailments is not None else None
    report["validity"] = validity(preds, gold, ontology)
    report["plausibility"] = plausibility(preds, gold, ontology, table)
    report["distribution"] = distribution(preds, gold)
    report["grounding"] = grounding(preds, gold, graphs)
    return report


def format_report(report: Mapping) -> str:
    """Text table in the row order of the standard results layout."""
    lines = [f"{'Metric':<14}{'Score':>10}"]
    for label, key in ROWS:
        v = report.get(key)
        lines.append(f"{label:<14}{'-' if v is None else f'{v:.2f}':>10}")
    detailed = report.get("detailed") or {}
    if detailed:
        lines.append("")
        lines.append(f"{'Type':<14}{'Score':>10}")
        for name in sorted(detailed, key=lambda n: list(CATALOG).index(n) if n in CATALOG else 99):
            lines.append(f"{name:<14}{detailed[name]:>10.2f}")
    return "\n".join(lines) + "\n"


def oracle_predictions(gold: Iterable[Mapping], graphs: Mapping[str, SceneGraph], ontology: Ontology) -> list[dict]:
    """Answers obtained by executing each gold program on its graph."""
    from .program import answer_text, execute

    return [
        {"questionId": g["questionId"],
         "answer": answer_text(execute(parse_program(g["semantic"]), graphs[g["imageId"]], ontology))}
        for g in gold
    ]
