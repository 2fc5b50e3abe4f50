"""Entailed questions with forced answers, and their closure.

A rule maps a (detailed type, answer) pair to new programs whose answers
follow logically.  Rules are plain records in ``RULES``; pass a different
sequence to :func:`entail` or :func:`closure` to extend or restrict them.
Rules that need facts beyond the source program (singleton checks, member
enumeration) consult the scene graph when one is given and stay silent
otherwise.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .ontology import Ontology, PlausibilityTable
from .program import (
    SCENE,
    WILDCARD,
    ExecutionError,
    Node,
    Program,
    Step,
    answer_text,
    build_tree,
    classify,
    execute,
    parse_program,
    resolve,
)
from .scenegraph import POSITIONAL, SAMENESS_TYPES, SceneGraph

log = logging.getLogger(__name__)

YES, NO = "yes", "no"
ANY = "*"
DEFAULT_MAX_ROUNDS = 4

# Spatial predicates that cannot hold in both directions between one pair.
CONTRADICTORY = {
    "to the left of": "to the right of",
    "to the right of": "to the left of",
    "above": "below",
    "below": "above",
}


@dataclass(frozen=True)
class Entailed:
    program: Program
    answer: str

    @property
    def semantic(self) -> str:
        return str(self.program)

    def to_record(self) -> dict:
        return {"semantic": self.semantic, "answer": self.answer}


@dataclass
class EntailContext:
    """Everything a rule may consult besides the source program.

    ``known`` maps (serialized reference chain, attribute type) to a value
    established by another question about the same image.
    """

    ontology: Ontology
    graph: SceneGraph | None = None
    table: PlausibilityTable | None = None
    known: dict[tuple[str, str], str] = field(default_factory=dict)


Transform = Callable[[EntailContext, Program, Node, str], Iterable[tuple[Program, str]]]


@dataclass(frozen=True)
class EntailmentRule:
    source_type: str
    source_answer: str
    produced_types: tuple[str, ...]
    transform: Transform
    name: str = ""

    def matches(self, detailed: str, answer: str) -> bool:
        return detailed == self.source_type and self.source_answer in (ANY, answer)


# --------------------------------------------------------------------------
# helpers


def _subtree(node: Node) -> tuple[Step, ...]:
    out: list[Node] = []
    todo = [node]
    while todo:
        n = todo.pop()
        out.append(n)
        todo.extend(n.children)
    return tuple(n.step for n in sorted(out, key=lambda n: n.index))


def _chain_text(steps: Sequence[Step]) -> str:
    return str(Program(tuple(steps)))


def _subject(chain: Sequence[Step]) -> str | None:
    names = [s.operands[0] for s in chain if s.op in ("select", "relate") and s.operands[0] != WILDCARD]
    return names[-1] if names else None


def _alternatives(ctx: EntailContext, chain: Sequence[Step], type_: str, value: str) -> list[str]:
    """Other values of ``type_``; restricted to ones seen with the subject when a table is given."""
    if type_ in ("name", "position"):
        return []
    values = [v for v in ctx.ontology.members(type_, "attribute") if v != value]
    subject = _subject(chain)
    if ctx.table is not None and subject in ctx.ontology:
        values = [v for v in values if ctx.table.plausible(subject, v)]
    return values


def _singleton(ctx: EntailContext, steps: Sequence[Step]) -> bool:
    if ctx.graph is None:
        return False
    try:
        return len(resolve(tuple(steps), ctx.graph, ctx.ontology)) == 1
    except (ExecutionError, TypeError):
        return False


# --------------------------------------------------------------------------
# transforms


def _from_query(ctx: EntailContext, program: Program, root: Node, answer: str):
    """query T = a  =>  verify T: a is yes, verify T: b is no, choose T: a|b is a."""
    prefix = program.steps[:-1]
    t = root.step.type_arg
    yield Program(prefix + (Step("verifyAttr", t, (answer,)),)), YES
    chain = root.chain
    if chain and chain[0].operands[0] == SCENE:
        others = [v for v in ctx.ontology.members(t, "attribute") if v != answer]
    else:
        others = _alternatives(ctx, chain, t, answer)
    for b in others:
        yield Program(prefix + (Step("verifyAttr", t, (b,)),)), NO
        yield Program(prefix + (Step("choose", t, (answer, b)),)), answer


def _verify_to_exist(ctx: EntailContext, program: Program, root: Node, answer: str):
    yield Program(program.steps[:-1] + (Step("exist"),)), YES


def _split_rel_exist(root: Node):
    """(anchor chain, relate step, tail filters) for select/filter*/relate/filter*/exist."""
    chain = root.chain
    rel_at = [i for i, s in enumerate(chain) if s.op == "relate"]
    if len(rel_at) != 1:
        return None
    i = rel_at[0]
    anchor, rel, tail = chain[:i], chain[i], chain[i + 1:]
    if not anchor or anchor[0].op != "select" or any(s.op != "filter" for s in anchor[1:]):
        return None
    if any(s.op != "filter" for s in tail):
        return None
    if rel.operands[0] == WILDCARD or anchor[0].operands[0] in (SCENE, WILDCARD):
        return None
    return anchor, rel, tail


def _flip(anchor, rel: Step, tail, predicate: str) -> Program:
    new_anchor = (Step("select", None, rel.operands),) + tuple(tail)
    new_rel = Step("relate", None, anchor[0].operands, rel.direction, (predicate,))
    return Program(new_anchor + (new_rel,) + tuple(anchor[1:]) + (Step("exist"),))


def _inverse_rel(ctx: EntailContext, program: Program, root: Node, answer: str):
    """x rel y exists  =>  y inverse(rel) x exists."""
    parts = _split_rel_exist(root)
    if parts is None:
        return
    anchor, rel, tail = parts
    inverse = ctx.ontology.inverses.get(rel.relations[0])
    if inverse is None:
        return
    yield _flip(anchor, rel, tail, inverse), YES


def _contradictory_rel(ctx: EntailContext, program: Program, root: Node, answer: str):
    """Unique x left of unique y  =>  x is not right of y (same for above/below)."""
    parts = _split_rel_exist(root)
    if parts is None:
        return
    anchor, rel, tail = parts
    opposite = CONTRADICTORY.get(rel.relations[0])
    if opposite is None or rel.relations[0] not in POSITIONAL:
        return
    subject_chain = (Step("select", None, rel.operands),) + tuple(tail)
    if not (_singleton(ctx, anchor) and _singleton(ctx, subject_chain)):
        return
    swapped = Step("relate", None, rel.operands, rel.direction, (opposite,))
    yield Program(tuple(anchor) + (swapped,) + tuple(tail) + (Step("exist"),)), NO


def _split_logic(ctx: EntailContext, program: Program, root: Node, answer: str):
    for child in root.children:
        yield Program(_subtree(child)), answer


def _two_same_known(ctx: EntailContext, program: Program, root: Node, answer: str):
    """a same T as b, and T of a is known  =>  T of b is the same value."""
    t = root.step.type_arg
    if t is None or t == "name":
        return
    a, b = (_subtree(c) for c in root.children)
    for this, other in ((a, b), (b, a)):
        value = ctx.known.get((_chain_text(this), t))
        if value is not None:
            yield Program(other + (Step("query", t),)), value


def _all_same_pairs(ctx: EntailContext, program: Program, root: Node, answer: str):
    """All members share T  =>  every pair of members shares T."""
    g = ctx.graph
    if g is None:
        return
    from .generator.references import ReferenceBuilder

    members = sorted(resolve(_subtree(root.children[0]), g, ctx.ontology))
    if root.step.type_arg:
        types = [root.step.type_arg]
    else:
        types = [t for t in SAMENESS_TYPES if all(_has_type(g, ctx.ontology, o, t) for o in members)]
    builder = ReferenceBuilder(g, ctx.ontology)
    refs = {}
    for oid in members:
        found = builder.build(oid, max_depth=1)
        if not found:
            return
        refs[oid] = min(found, key=lambda r: (r.hops, len(r.prefix), r.program)).prefix
    for x, y in itertools.combinations(members, 2):
        for t in types:
            yield Program(refs[x] + refs[y] + (Step("same", t),)), YES


def _has_type(g: SceneGraph, ontology: Ontology, oid: str, t: str) -> bool:
    return any(ontology[a].category == t for a in g.objects[oid].attributes)


RULES: tuple[EntailmentRule, ...] = (
    EntailmentRule("queryAttr", ANY, ("verifyAttr", "chooseAttr"), _from_query, "query-to-verify-choose"),
    EntailmentRule("queryGlobal", ANY, ("verifyGlobal", "chooseGlobal"), _from_query, "global-query-to-verify-choose"),
    EntailmentRule("verifyAttr", YES, ("exist", "existRel"), _verify_to_exist, "verify-to-exist"),
    EntailmentRule("existRel", YES, ("existRel",), _inverse_rel, "inverse-relation"),
    EntailmentRule("existRel", YES, ("existRel",), _contradictory_rel, "contradictory-relation"),
    EntailmentRule("logicAnd", YES, ("exist", "existRel"), _split_logic, "and-to-conjuncts"),
    EntailmentRule("logicOr", NO, ("exist", "existRel"), _split_logic, "or-to-disjuncts"),
    EntailmentRule("twoSame", YES, ("queryAttr",), _two_same_known, "same-propagates-value"),
    EntailmentRule("allSame", YES, ("twoSame",), _all_same_pairs, "all-same-to-pairs"),
)


# --------------------------------------------------------------------------
# entry points


def entail(
    program: Program | str, answer: str, ctx: EntailContext, rules: Sequence[EntailmentRule] = RULES
) -> list[Entailed]:
    """One application of the rule catalog; deduplicated, source excluded."""
    if isinstance(program, str):
        program = parse_program(program)
    _, _, detailed = classify(program)
    root = build_tree(program)
    source = str(program)
    seen: dict[str, Entailed] = {}
    for rule in rules:
        if not rule.matches(detailed, answer):
            continue
        for produced, forced in rule.transform(ctx, program, root, answer):
            key = str(produced)
            if key == source or key in seen:
                continue
            _, _, kind = classify(produced)
            if kind not in rule.produced_types:
                raise ValueError(f"rule {rule.name} produced {kind} program {key}")
            seen[key] = Entailed(produced, forced)
    return list(seen.values())


def closure(
    program: Program | str, answer: str, ctx: EntailContext,
    max_rounds: int = DEFAULT_MAX_ROUNDS, rules: Sequence[EntailmentRule] = RULES,
) -> list[Entailed]:
    """Apply :func:`entail` to new members until nothing changes or ``max_rounds``."""
    if isinstance(program, str):
        program = parse_program(program)
    source = str(program)
    members: dict[str, Entailed] = {}
    frontier = [Entailed(program, answer)]
    for _ in range(max_rounds):
        fresh: list[Entailed] = []
        for item in frontier:
            for e in entail(item.program, item.answer, ctx, rules):
                if e.semantic == source or e.semantic in members:
                    continue
                members[e.semantic] = e
                fresh.append(e)
                _learn(ctx, e.program, e.answer)
        if not fresh:
            break
        frontier = fresh
    return list(members.values())


def _learn(ctx: EntailContext, program: Program, answer: str) -> None:
    last = program.steps[-1]
    if last.op == "query" and last.type_arg not in (None, "name"):
        ctx.known.setdefault((_chain_text(program.steps[:-1]), last.type_arg), answer)


def known_facts(records: Iterable[Mapping]) -> dict[str, dict[tuple[str, str], str]]:
    """Attribute values established by query questions, per image."""
    out: dict[str, dict[tuple[str, str], str]] = {}
    for r in records:
        program = parse_program(r["semantic"])
        last = program.steps[-1]
        if last.op == "query" and last.type_arg not in (None, "name"):
            key = (_chain_text(program.steps[:-1]), last.type_arg)
            out.setdefault(r["imageId"], {}).setdefault(key, r["answer"])
    return out


def _closure_job(args) -> dict:
    rec, ontology, graph, table, known, max_rounds = args
    ctx = EntailContext(ontology, graph, table, dict(known))
    members = closure(rec["semantic"], rec["answer"], ctx, max_rounds)
    return {"questionId": rec["questionId"], "entailed": [m.to_record() for m in members]}


def entail_corpus(
    records: Sequence[Mapping], ontology: Ontology, graphs: Mapping[str, SceneGraph] | None = None,
    table: PlausibilityTable | None = None, max_rounds: int = DEFAULT_MAX_ROUNDS, workers: int = 1,
) -> Iterator[dict]:
    """Sidecar records ``{questionId, entailed: [{semantic, answer}]}`` in input order."""
    known = known_facts(records)
    graphs = graphs or {}
    jobs = [
        (r, ontology, graphs.get(r["imageId"]), table, known.get(r["imageId"], {}), max_rounds)
        for r in records
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(_closure_job, jobs, chunksize=64)
    else:
        for job in jobs:
            yield _closure_job(job)


def check_soundness(
    sidecar: Iterable[Mapping], records: Mapping[str, Mapping], graphs: Mapping[str, SceneGraph],
    ontology: Ontology,
) -> tuple[int, list[str]]:
    """Execute every entailed member on its image; return (checked, failures)."""
    checked, failures = 0, []
    for item in sidecar:
        g = graphs[records[item["questionId"]]["imageId"]]
        for m in item["entailed"]:
            checked += 1
            try:
                got = answer_text(execute(parse_program(m["semantic"]), g, ontology))
            except ExecutionError as e:
                got = f"<{type(e).__name__}>"
            if got != m["answer"]:
                failures.append(f"{item['questionId']}: {m['semantic']} -> {got}, forced {m['answer']}")
    return checked, failures
