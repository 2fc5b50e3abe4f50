"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
"""

import time
from collections import Counter
from pathlib import Path

import pytest

from sgqa.balancing import AnswerDistribution, BalanceConfig, assign_splits, entropy, head_tail_ratios, rebalance
from sgqa.cli import default_graphs_path, main
from sgqa.entailment import check_soundness, entail_corpus
from sgqa.generator import GenContext, generate_corpus, generate_graph
from sgqa.jsonl import dumps
from sgqa.metrics import chi_square, evaluate, oracle_predictions
from sgqa.program import answer_text, classify, execute, parse_program
from sgqa.scenegraph import build_plausibility, iter_records, normalize
from catalog_cases import CASES
from conftest import KITCHEN, record_acceptance

TOL = 1e-9


def _check(number, name, failures, detail):
    passed = not failures
    record_acceptance(number, name, passed, detail if passed else "; ".join(failures[:5]))
    assert passed, failures[:20]


def test_catalog_coverage(ontology, scene_config):
    start = time.perf_counter()
    graph = normalize(KITCHEN, ontology, scene_config)
    failures = []
    covered = set()
    for detailed, text, expected in CASES:
        program = parse_program(text)
        got_type = classify(program)[2]
        got = answer_text(execute(program, graph, ontology))
        if got_type != detailed or got != expected:
            failures.append(f"{detailed}: {got_type} answered {got!r}, expected {expected!r}")
        covered.add(got_type)
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        failures.append(f"took {elapsed:.2f}s")
    _check(1, "catalog coverage", failures, f"{len(CASES) - len(failures)}/{len(CASES)} rows, {elapsed:.3f}s")


def test_generator_soundness(demo_graphs, patterns, gen_context, ontology):
    start = time.perf_counter()
    questions = [q.to_record() for q in generate_corpus(demo_graphs, patterns, gen_context, seed=0)]
    graphs = {g.image_id: g for g in demo_graphs}
    failures = []
    for q in questions:
        got = answer_text(execute(parse_program(q["semantic"]), graphs[q["imageId"]], ontology))
        if got != q["answer"]:
            failures.append(f"{q['questionId']}: {q['semantic']} -> {got}, stored {q['answer']}")
    elapsed = time.perf_counter() - start
    if len(demo_graphs) < 50 or len(questions) < 1000:
        failures.append(f"corpus too small: {len(demo_graphs)} graphs, {len(questions)} questions")
    if elapsed >= 30:
        failures.append(f"took {elapsed:.1f}s")
    _check(2, "generator soundness", failures,
           f"{len(questions)} questions on {len(demo_graphs)} graphs, 100% sound, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def sidecar(demo_corpus, graphs_by_id, ontology, demo_table):
    start = time.perf_counter()
    items = list(entail_corpus(demo_corpus, ontology, graphs_by_id, demo_table))
    return items, time.perf_counter() - start


def test_entailment_soundness(sidecar, demo_corpus, graphs_by_id, ontology):
    items, closure_time = sidecar
    start = time.perf_counter()
    checked, failures = check_soundness(items, {r["questionId"]: r for r in demo_corpus}, graphs_by_id, ontology)
    elapsed = closure_time + time.perf_counter() - start
    if checked == 0:
        failures.append("no closure members were produced")
    if elapsed >= 30:
        failures.append(f"took {elapsed:.1f}s")
    _check(3, "entailment soundness", failures, f"{checked} closure members, 100% sound, {elapsed:.1f}s")


def test_oracle_ceiling(sidecar, demo_corpus, graphs_by_id, ontology, demo_table):
    items, _ = sidecar
    start = time.perf_counter()
    preds = oracle_predictions(demo_corpus, graphs_by_id, ontology)
    report = evaluate(preds, demo_corpus, ontology, demo_table, items, graphs_by_id)
    elapsed = time.perf_counter() - start
    failures = [
        f"{key} = {report[key]}" for key in ("accuracy", "consistency", "validity", "plausibility")
        if report[key] != 100.0
    ]
    if report["distribution"] != 0.0:
        failures.append(f"distribution = {report['distribution']}")
    if elapsed >= 10:
        failures.append(f"took {elapsed:.1f}s")
    _check(4, "oracle metric ceiling", failures, f"all metrics at ceiling, {elapsed:.1f}s")


BINARY_GROUPS = ("exist", "verifyAttr-color", "verifyRel-on")
OPEN_GROUPS = {"color": ("red", "green", "blue"), "material": ("wooden", "metal", "plastic"),
               "fruit": ("apple", "banana", "orange")}


def _skewed_corpus():
    records = []

    def add(group, answer, n):
        for _ in range(n):
            i = len(records)
            records.append({"questionId": f"s{i:06d}", "imageId": f"img{i % 200}", "answer": answer,
                            "groups": {"global": group, "local": f"thing-{group}"}})

    for group in BINARY_GROUPS:
        add(group, "yes", 900)
        add(group, "no", 100)
    for group, answers in OPEN_GROUPS.items():
        for answer, n in zip(answers, (800, 150, 50)):
            add(group, answer, n)
    return records


def _majority_accuracy(records, majority):
    return 100.0 * sum(r["answer"] == majority[r["groups"]["global"]] for r in records) / len(records)


def test_balancing_contract():
    start = time.perf_counter()
    cfg = BalanceConfig(b=3.0, r_min=0.2, r_max=0.85, seed=0)
    records = _skewed_corpus()
    balanced, reports = rebalance(records, cfg)
    failures = []
    for rep in reports:
        order = AnswerDistribution.from_counts(rep.group, rep.input).answers
        target = [rep.target[a] for a in order]
        counts = [rep.input[a] for a in order]
        if not rep.feasible:
            failures.append(f"{rep.level}/{rep.group}: infeasible")
        if any(r > cfg.b + TOL for r in head_tail_ratios(target)):
            failures.append(f"{rep.level}/{rep.group}: head/tail above b")
        for i in range(len(target) - 1):
            ratio = target[i + 1] / target[i]
            if not cfg.r_min - TOL <= ratio <= cfg.r_max + TOL:
                failures.append(f"{rep.level}/{rep.group}: ratio {ratio:.6f} outside clamp")
            if target[i] < target[i + 1] - TOL:
                failures.append(f"{rep.level}/{rep.group}: rank order changed")
        if any(t > c + TOL for t, c in zip(target, counts)):
            failures.append(f"{rep.level}/{rep.group}: target above input")

    entropy_gains = {}
    for level in ("global", "local"):
        before, after = Counter(), Counter()
        for r in records:
            before[(r["groups"][level], r["answer"])] += 1
        for r in balanced:
            after[(r["groups"][level], r["answer"])] += 1
        for group in {g for g, _ in before}:
            h0 = entropy(c for (g, _), c in before.items() if g == group)
            h1 = entropy(c for (g, _), c in after.items() if g == group)
            entropy_gains[(level, group)] = h1 - h0
            if not h1 > h0:
                failures.append(f"{level}/{group}: entropy {h0:.4f} -> {h1:.4f}")

    counts = Counter((r["groups"]["global"], r["answer"]) for r in records)
    majority = {}
    for (group, answer), n in sorted(counts.items()):
        if group not in majority or n > counts[(group, majority[group])]:
            majority[group] = answer
    acc_before = _majority_accuracy(records, majority)
    acc_after = _majority_accuracy(balanced, majority)
    drop = acc_before - acc_after
    if drop < 15:
        failures.append(f"majority accuracy drop {drop:.1f} points")
    elapsed = time.perf_counter() - start
    if elapsed >= 60:
        failures.append(f"took {elapsed:.1f}s")
    _check(5, "balancing contract", failures,
           f"{len(reports)} targets within bounds, min entropy gain {min(entropy_gains.values()):.3f} bits, "
           f"majority accuracy {acc_before:.1f} -> {acc_after:.1f}, {elapsed:.2f}s")


def test_split_contract():
    start = time.perf_counter()
    records = [{"questionId": f"q{i:05d}", "imageId": f"image{i % 1000:04d}"} for i in range(3000)]
    cfg = BalanceConfig(seed=11)
    first = assign_splits(records, cfg)
    second = assign_splits(list(reversed(records)), cfg)
    failures = []
    image_split = {}
    for r in first:
        if image_split.setdefault(r["imageId"], r["split"]) != r["split"]:
            failures.append(f"image {r['imageId']} in two splits")
    sizes = Counter(image_split.values())
    for name, share in zip(("train", "val", "test", "challenge"), cfg.split_shares):
        if abs(sizes[name] / 1000 - share) > 0.02:
            failures.append(f"{name}: {sizes[name]} images")
    bytes_a = "\n".join(dumps(r) for r in first).encode()
    bytes_b = "\n".join(dumps(r) for r in sorted(second, key=lambda r: r["questionId"])).encode()
    if bytes_a != bytes_b:
        failures.append("split assignment not reproducible")
    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        failures.append(f"took {elapsed:.1f}s")
    _check(6, "split contract", failures,
           f"sizes {dict(sorted(sizes.items()))}, 0 overlaps, reproducible, {elapsed:.2f}s")


def test_distribution_metric():
    value = chi_square({"red": 8, "green": 2}, {"red": 10, "green": 0})
    same = chi_square({"red": 8, "green": 2}, {"red": 8, "green": 2})
    failures = []
    if abs(value - 2.5) > 1e-12:
        failures.append(f"chi-square {value!r}")
    if same != 0.0:
        failures.append(f"identical distributions gave {same!r}")
    _check(7, "distribution metric", failures, f"{value!r} and {same!r}")


def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_determinism(tmp_path):
    start = time.perf_counter()
    runs = []
    for name in ("a", "b"):
        workdir = tmp_path / name
        code = main(["pipeline", "--workdir", str(workdir), "--seed", "0"])
        assert code == 0
        runs.append(_tree(workdir))
    a, b = runs
    failures = [f"{name} differs" for name in sorted(set(a) | set(b)) if a.get(name) != b.get(name)]
    elapsed = time.perf_counter() - start
    _check(8, "determinism", failures, f"{len(a)} files byte-identical across two runs, {elapsed:.1f}s")


def test_real_data_smoke(ontology, scene_config, patterns):
    path = Path(default_graphs_path()).with_name("real_graphs.jsonl")
    records = list(iter_records(path))
    graphs = [normalize(r, ontology, scene_config) for r in records]
    ctx = GenContext(ontology, build_plausibility(graphs, ontology), scene_config.unannotated)
    failures = []
    per_graph = {}
    if len(records) != 5:
        failures.append(f"{len(records)} records")
    for g in graphs:
        questions, _ = generate_graph(g, patterns, ctx, seed=0)
        per_graph[g.image_id] = len(questions)
        if not questions:
            failures.append(f"{g.image_id}: no questions")
        for q in questions:
            if answer_text(execute(parse_program(q.semantic), g, ontology)) != q.answer:
                failures.append(f"{q.questionId}: unsound")
    _check(9, "real-data smoke", failures, f"questions per graph {per_graph}")
