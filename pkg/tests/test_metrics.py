import random

import pytest
from hypothesis import given, settings, strategies as st

from sgqa.labels import label_groups
from sgqa.metrics import (
    EPSILON,
    MetricError,
    accuracy,
    answer_scope,
    chi_square,
    consistency,
    distribution,
    evaluate,
    format_report,
    grid_mass,
    grounding,
    is_plausible,
    oracle_predictions,
)
from sgqa.ontology import PlausibilityTable
from sgqa.program import classify


def rec(qid, semantic, answer, image="kitchen1", annotations=None):
    structural, semantic_type, detailed = classify(semantic)
    label = label_groups(semantic)
    return {"questionId": qid, "imageId": image, "semantic": semantic, "answer": answer,
            "types": {"structural": structural, "semantic": semantic_type, "detailed": detailed},
            "groups": {"global": label.global_, "local": label.local},
            "annotations": annotations or {}}


def preds(**answers):
    return {q: {"questionId": q, "answer": a} for q, a in answers.items()}


GOLD = [
    rec("q1", "select: apple/query: color", "red"),
    rec("q2", "select: apple/verify color: red", "yes"),
    rec("q3", "select: banana/exist", "yes"),
    rec("q4", "select: plate/query: color", "white"),
]


class TestChiSquare:
    def test_known_value(self):
        # (10-8)^2/8 + (0-2)^2/2
        assert chi_square({"red": 8, "green": 2}, {"red": 10, "green": 0}) == pytest.approx(2.5, abs=1e-12)

    def test_identical_is_zero(self):
        assert chi_square({"a": 3, "b": 5}, {"a": 3, "b": 5}) == 0.0

    def test_epsilon_for_unseen_gold_answer(self):
        assert chi_square({"a": 2}, {"a": 1, "b": 1}) == pytest.approx(1 / 2 + 1 / EPSILON)

    def test_prediction_rescaled(self):
        assert chi_square({"a": 4, "b": 4}, {"a": 1, "b": 1}) == 0.0


dists = st.dictionaries(st.sampled_from("abcdef"), st.integers(1, 50), min_size=2)


@settings(max_examples=200, deadline=None)
@given(dists, dists, st.permutations("abcdef"))
def test_chi_square_ignores_answer_names(gold, pred, perm):
    rename = dict(zip("abcdef", perm))
    g2 = {rename[k]: v for k, v in gold.items()}
    p2 = {rename[k]: v for k, v in pred.items()}
    assert chi_square(g2, p2) == pytest.approx(chi_square(gold, pred), abs=1e-9)
    assert chi_square(gold, pred) >= 0


class TestAccuracy:
    def test_buckets(self):
        acc = accuracy(preds(q1="red", q2="no", q3="yes", q4="white"), GOLD)
        assert acc["accuracy"] == 75.0
        assert acc["binary"] == 50.0 and acc["open"] == 100.0
        assert acc["detailed:verifyAttr"] == 0.0
        assert acc["query"] == 100.0

    def test_missing_prediction_counts_wrong(self):
        assert accuracy(preds(q1="red"), GOLD)["accuracy"] == 25.0

    def test_answers_normalized(self):
        assert accuracy(preds(q1=" Red "), GOLD[:1])["accuracy"] == 100.0


class TestConsistency:
    ENTAILED = [{"questionId": "q1", "entailed": [{"semantic": "select: apple/verify color: red", "answer": "yes"},
                                                  {"semantic": "select: apple/exist", "answer": "yes"}]}]

    def test_inconsistent_answer(self):
        assert consistency(preds(q1="red", q2="no"), GOLD, self.ENTAILED) == 0.0
        assert consistency(preds(q1="red", q2="yes"), GOLD, self.ENTAILED) == 100.0

    def test_absent_when_source_wrong(self):
        assert consistency(preds(q1="green", q2="no"), GOLD, self.ENTAILED) is None

    def test_other_images_ignored(self):
        gold = [GOLD[0], dict(GOLD[1], imageId="other")]
        assert consistency(preds(q1="red", q2="no"), gold, self.ENTAILED) is None


class TestValidityPlausibility:
    def test_scopes(self, ontology):
        assert "green" in answer_scope(GOLD[0], ontology)
        assert "wooden" not in answer_scope(GOLD[0], ontology)
        assert answer_scope(GOLD[1], ontology).values == {"yes", "no"}
        assert "table" in answer_scope(rec("r", "select: apple/relate(object, on): _/query: name", "table"), ontology)

    def test_plausibility_uses_corpus(self, ontology):
        table = PlausibilityTable(ontology, {("apple", "red"): 3, ("apple", "green"): 1})
        assert is_plausible(GOLD[0], "green", ontology, table)
        assert not is_plausible(GOLD[0], "purple", ontology, table)
        assert not is_plausible(GOLD[0], "wooden", ontology, table)

    def test_compare_answer_must_be_compared(self, ontology):
        r = rec("c", "select: girl/select: boy/compare height: taller", "girl")
        table = PlausibilityTable(ontology)
        assert is_plausible(r, "boy", ontology, table)
        assert not is_plausible(r, "apple", ontology, table)

    def test_global_subject_is_scene(self, ontology):
        r = rec("g", "select: scene/query: location", "kitchen")
        table = PlausibilityTable(ontology, {("scene", "kitchen"): 1})
        assert is_plausible(r, "kitchen", ontology, table)
        assert not is_plausible(r, "beach", ontology, table)


class TestGrounding:
    def test_object_mass(self):
        gold = [rec("q1", "select: apple/query: color", "red", annotations={"question": {"3": "2"}})]
        p = {"q1": {"questionId": "q1", "answer": "red", "attention": {"2": 0.6, "3": 0.3}}}
        assert grounding(p, gold) == pytest.approx(60.0)

    def test_absent_without_attention(self):
        assert grounding(preds(q1="red"), GOLD) is None

    def test_mass_above_one_rejected(self):
        p = {"q1": {"questionId": "q1", "answer": "red", "attention": {"2": 0.7, "3": 0.7}}}
        with pytest.raises(MetricError):
            grounding(p, GOLD)

    def test_grid_fraction(self):
        grid = [[1 / 49] * 7 for _ in range(7)]
        # two whole cells, the same two cells again, then half a cell
        assert grid_mass(grid, [(0, 0, 200, 100)], 700, 700) == pytest.approx(2 / 49)
        assert grid_mass(grid, [(0, 0, 200, 100), (0, 0, 200, 100)], 700, 700) == pytest.approx(2 / 49)
        assert grid_mass(grid, [(0, 0, 50, 100)], 700, 700) == pytest.approx(0.5 / 49)

    def test_grid_needs_graph(self):
        gold = [rec("q1", "select: apple/query: color", "red", annotations={"question": {"3": "2"}})]
        p = {"q1": {"questionId": "q1", "answer": "red", "attention": {"grid": [[0.5, 0.5]]}}}
        with pytest.raises(MetricError, match="needs graph"):
            grounding(p, gold)


class TestEvaluate:
    def test_unknown_question_rejected(self, ontology, demo_table):
        with pytest.raises(MetricError, match="unknown"):
            evaluate([{"questionId": "zz", "answer": "x"}], GOLD, ontology, demo_table)

    def test_duplicate_prediction_rejected(self, ontology, demo_table):
        with pytest.raises(MetricError, match="duplicate"):
            evaluate([{"questionId": "q1", "answer": "x"}] * 2, GOLD, ontology, demo_table)

    def test_oracle_on_kitchen(self, kitchen, ontology, demo_table):
        from catalog_cases import CASES
        gold = [rec(f"k{i}", text, answer) for i, (_, text, answer) in enumerate(CASES)]
        report = evaluate(oracle_predictions(gold, {"kitchen1": kitchen}, ontology), gold, ontology, demo_table)
        assert report["accuracy"] == 100.0 and report["validity"] == 100.0
        text = format_report(report)
        assert "Accuracy" in text and "100.00" in text

    def test_constant_answer_has_distribution_gap(self, ontology, demo_table):
        gold = [rec(f"q{i}", "select: apple/verify color: red", "yes" if i % 2 else "no") for i in range(10)]
        report = evaluate([{"questionId": g["questionId"], "answer": "yes"} for g in gold], gold, ontology, demo_table)
        assert report["accuracy"] == 50.0
        # (10-5)^2/5 + (0-5)^2/5
        assert report["distribution"] == pytest.approx(10.0)


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False))
def test_metrics_ignore_record_order(ontology, demo_table, demo_corpus, rnd):
    gold = demo_corpus[:300]
    pool = ["yes", "no", "red", "white", "table", "shape"]
    predictions = [{"questionId": g["questionId"], "answer": rnd.choice(pool + [g["answer"]] * 3)} for g in gold]
    base = evaluate(predictions, gold, ontology, demo_table)
    gold2, pred2 = gold[:], predictions[:]
    rnd.shuffle(gold2)
    rnd.shuffle(pred2)
    again = evaluate(pred2, gold2, ontology, demo_table)
    for key, value in base.items():
        if isinstance(value, float):
            assert again[key] == pytest.approx(value, abs=1e-9)
    assert base["plausibility"] <= base["validity"]


def test_grid_grounding_on_graph(kitchen):
    gold = [rec("q1", "select: apple/query: color", "red", annotations={"question": {"3": "2"}})]
    p = {"q1": {"questionId": "q1", "answer": "red", "attention": {"grid": [[1.0]]}}}
    # the apple box is 50x50 in a 640x480 image
    assert grounding(p, gold, {"kitchen1": kitchen}) == pytest.approx(100 * 2500 / (640 * 480))
