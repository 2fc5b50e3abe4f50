"""Question instantiation and corpus generation."""

from __future__ import annotations

import hashlib
import logging
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from ..labels import label_groups
from ..program import (
    BINARY_TYPES,
    AmbiguousReference,
    ExecutionError,
    answer_text,
    classify,
    execute,
    parse_program,
)
from ..scenegraph import SceneGraph
from .patterns import Pattern
from .sites import BINDERS, Binding, GenContext, GraphSites
from .text import FIELD, indefinite, realize

log = logging.getLogger(__name__)

DISCLOSES = "discloses answer"
REPEATS = "repeats information"
MULTIPLE = "multiple valid answers"


@dataclass(frozen=True)
class Rejection:
    reason: str
    group: str = ""


@dataclass
class QAInstance:
    questionId: str
    imageId: str
    question: str
    semantic: str
    answer: str
    fullAnswer: str
    types: dict
    groups: dict
    annotations: dict
    seed: int
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {
            "questionId": self.questionId,
            "imageId": self.imageId,
            "question": self.question,
            "semantic": self.semantic,
            "answer": self.answer,
            "fullAnswer": self.fullAnswer,
            "types": self.types,
            "groups": self.groups,
            "annotations": self.annotations,
            "seed": self.seed,
        }
        rec.update(self.extra)
        return rec


def fill_program(template: str, values: Mapping[str, str]) -> str:
    def sub(m):
        name = m.group(1)
        if name not in values:
            raise KeyError(f"program hole <{name}> is unbound")
        return values[name]

    return FIELD.sub(sub, template)


def instantiate(
    g: SceneGraph, pattern: Pattern, binding: Binding, rng: random.Random, ctx: GenContext,
    question_id: str = "", seed: int = 0,
) -> QAInstance | Rejection:
    """Fill ``pattern`` with ``binding``; execute it to fix the answer."""
    ont = ctx.ontology
    program = parse_program(fill_program(pattern.program, binding.program))
    structural, semantic, detailed = classify(program)
    if detailed != pattern.group:
        raise ValueError(f"pattern for {pattern.group} produced a {detailed} program: {program}")
    disclosed = set(binding.asked)
    for ref in binding.refs:
        if disclosed & ref.facts:
            reason = REPEATS if detailed in BINARY_TYPES else DISCLOSES
            return Rejection(reason, detailed)
    try:
        value = execute(program, g, ont)
    except AmbiguousReference as e:
        if e.step == len(program):
            return Rejection(MULTIPLE, detailed)
        return Rejection(f"ambiguous reference: {e.reason}", detailed)
    except ExecutionError as e:
        return Rejection(f"{type(e).__name__}: {e.reason}", detailed)
    answer = answer_text(value)

    fields = dict(binding.fields)
    fields["answer"] = answer
    oid = binding.answer_object
    if answer in ont.concepts:
        fields["answer_a"] = ((indefinite(ont, answer), oid),)
        fields["answer_the"] = ((f"the {answer}", oid),)
    text, q_spans = realize(rng.choice(pattern.texts), fields, rng)
    short, _ = realize(pattern.answer, {"answer": answer}, rng)
    short = short[:1].lower() + short[1:]
    full, f_spans = realize(pattern.full_template(answer), fields, rng)
    annotations = {"question": q_spans, "answer": {}, "fullAnswer": f_spans}
    if oid is not None and answer in ont.concepts:
        n = len(answer.split())
        annotations["answer"] = {("0" if n == 1 else f"0:{n}"): oid}
    glabel = label_groups(program)
    return QAInstance(
        questionId=question_id,
        imageId=g.image_id,
        question=text,
        semantic=str(program),
        answer=short,
        fullAnswer=full,
        types={"structural": structural, "semantic": semantic, "detailed": detailed},
        groups={"global": glabel.global_, "local": glabel.local},
        annotations=annotations,
        seed=seed,
    )


def graph_seed(seed: int, image_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{image_id}".encode()).hexdigest()
    return int(digest[:16], 16)


def generate_graph(
    g: SceneGraph, patterns: Sequence[Pattern], ctx: GenContext, seed: int
) -> tuple[list[QAInstance], Counter]:
    """All accepted questions for one graph plus a count of rejection reasons."""
    rng = random.Random(graph_seed(seed, g.image_id))
    by_group: dict[str, list[Pattern]] = {}
    for p in patterns:
        by_group.setdefault(p.group, []).append(p)
    sites = GraphSites(g, ctx, rng)
    out: list[QAInstance] = []
    rejected: Counter = Counter()
    for group in sorted(by_group):
        binder = BINDERS[group]
        for site in binder(sites):
            for binding in site.bindings:
                options = [p for p in by_group[group] if p.applies(binding.conds)]
                if not options:
                    rejected["no pattern"] += 1
                    break
                pattern = rng.choice(options)
                qid = f"{g.image_id}_{len(out):04d}"
                result = instantiate(g, pattern, binding, rng, ctx, qid, seed)
                if isinstance(result, QAInstance):
                    out.append(result)
                    break
                rejected[result.reason] += 1
                log.debug("image %s site %s/%s rejected: %s", g.image_id, group, site.key, result.reason)
    return out, rejected


def _generate_one(args) -> tuple[list[QAInstance], Counter]:
    g, patterns, ctx, seed = args
    return generate_graph(g, patterns, ctx, seed)


def generate_corpus(
    graphs: Iterable[SceneGraph], patterns: Sequence[Pattern], ctx: GenContext, seed: int,
    workers: int = 1, rejections: Counter | None = None,
) -> Iterator[QAInstance]:
    """Stream questions for every graph in input order.

    Each graph gets its own rng derived from (seed, imageId), so the output
    does not depend on ``workers``.
    """
    jobs = ((g, patterns, ctx, seed) for g in graphs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_generate_one, jobs, chunksize=4)
            for items, rej in results:
                if rejections is not None:
                    rejections.update(rej)
                yield from items
    else:
        for job in jobs:
            items, rej = _generate_one(job)
            if rejections is not None:
                rejections.update(rej)
            yield from items
