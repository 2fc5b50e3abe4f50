import itertools

import pytest

from sgqa.entailment import (
    RULES,
    EntailContext,
    check_soundness,
    closure,
    entail,
    entail_corpus,
    known_facts,
)
from sgqa.program import answer_text, classify, execute, parse_program
from sgqa.scenegraph import normalize


def _ctx(kitchen, ontology, table=None, known=None):
    return EntailContext(ontology, kitchen, table, dict(known or {}))


def _pairs(members):
    return {(m.semantic, m.answer) for m in members}


class TestRules:
    def test_query_attr_entails_verify_yes_and_alternatives(self, kitchen, ontology, demo_table):
        got = _pairs(closure("select: apple/query: color", "red", _ctx(kitchen, ontology, demo_table)))
        assert ("select: apple/verify color: red", "yes") in got
        assert ("select: apple/exist", "yes") in got
        assert ("select: apple/verify color: green", "no") in got
        assert ("select: apple/choose color: red|green", "red") in got
        assert ("select: apple/verify color: purple", "no") not in got

    def test_inverse_and_contradictory_relation(self, kitchen, ontology):
        got = _pairs(closure("select: plate/relate(subject, to the left of): apple/exist", "yes",
                             _ctx(kitchen, ontology)))
        assert got == {
            ("select: apple/relate(subject, to the right of): plate/exist", "yes"),
            ("select: plate/relate(subject, to the right of): apple/exist", "no"),
            ("select: apple/relate(subject, to the left of): plate/exist", "no"),
        }

    def test_logic_splits(self, kitchen, ontology):
        assert _pairs(entail("select: banana/exist/select: car/exist/or", "no", _ctx(kitchen, ontology))) == {
            ("select: banana/exist", "no"), ("select: car/exist", "no")}
        assert _pairs(entail("select: apple/exist/select: banana/exist/and", "yes", _ctx(kitchen, ontology))) == {
            ("select: apple/exist", "yes"), ("select: banana/exist", "yes")}

    def test_no_rule_for_negative_logic_and(self, kitchen, ontology):
        assert entail("select: apple/exist/select: car/exist/and", "no", _ctx(kitchen, ontology)) == []

    def test_two_same_uses_known_value(self, kitchen, ontology):
        known = {("select: girl/relate(object, wearing): shirt", "color"): "blue"}
        program = "select: girl/relate(object, wearing): shirt/select: boy/relate(object, wearing): shirt/same color"
        got = _pairs(entail(program, "yes", _ctx(kitchen, ontology, known=known)))
        assert ("select: boy/relate(object, wearing): shirt/query: color", "blue") in got

    def test_all_same_expands_to_every_pair(self, ontology, scene_config):
        # left/top, middle and right/top, so each shirt has a position reference
        shirts = {str(i): {"name": "shirt", "x": x, "y": y, "w": 40, "h": 40, "attributes": ["blue"],
                           "relations": []} for i, (x, y) in enumerate(((10, 10), (280, 200), (560, 10)))}
        g = normalize({"imageId": "s", "width": 640, "height": 480, "objects": shirts}, ontology, scene_config)
        members = entail("select: shirt/same color", "yes", EntailContext(ontology, g))
        assert {classify(m.program)[2] for m in members} == {"twoSame"}
        assert len(members) == len(list(itertools.combinations(shirts, 2)))
        for m in members:
            assert answer_text(execute(m.program, g, ontology)) == "yes"

    def test_all_same_without_references_yields_nothing(self, ontology, scene_config):
        shirts = {str(i): {"name": "shirt", "x": x, "y": 10, "w": 40, "h": 40, "attributes": ["blue"],
                           "relations": []} for i, x in enumerate((10, 280, 560))}
        g = normalize({"imageId": "s", "width": 640, "height": 480, "objects": shirts}, ontology, scene_config)
        assert entail("select: shirt/same color", "yes", EntailContext(ontology, g)) == []

    def test_rules_declare_what_they_produce(self):
        for rule in RULES:
            assert rule.produced_types and rule.name


class TestClosure:
    def test_source_excluded_and_unique(self, kitchen, ontology, demo_table):
        source = "select: scene/query: location"
        members = closure(source, "kitchen", _ctx(kitchen, ontology, demo_table))
        semantics = [m.semantic for m in members]
        assert source not in semantics
        assert len(semantics) == len(set(semantics))

    def test_round_limit(self, kitchen, ontology, demo_table):
        one = closure("select: apple/query: color", "red", _ctx(kitchen, ontology, demo_table), max_rounds=1)
        full = closure("select: apple/query: color", "red", _ctx(kitchen, ontology, demo_table))
        assert ("select: apple/exist", "yes") not in _pairs(one)
        assert _pairs(one) < _pairs(full)

    def test_members_are_sound_on_kitchen(self, kitchen, ontology, demo_table):
        from catalog_cases import CASES
        for _, text, answer in CASES:
            for m in closure(text, answer, _ctx(kitchen, ontology, demo_table)):
                assert answer_text(execute(m.program, kitchen, ontology)) == m.answer, m.semantic


class TestCorpus:
    def test_known_facts(self):
        records = [
            {"imageId": "a", "semantic": "select: apple/query: color", "answer": "red"},
            {"imageId": "a", "semantic": "select: apple/exist", "answer": "yes"},
        ]
        assert known_facts(records) == {"a": {("select: apple", "color"): "red"}}

    def test_corpus_sidecar_is_sound(self, demo_corpus, graphs_by_id, ontology, demo_table):
        sample = demo_corpus[:800]
        sidecar = list(entail_corpus(sample, ontology, graphs_by_id, demo_table))
        assert [s["questionId"] for s in sidecar] == [r["questionId"] for r in sample]
        checked, failures = check_soundness(sidecar, {r["questionId"]: r for r in sample}, graphs_by_id, ontology)
        assert checked > 0 and failures == []

    def test_check_soundness_reports_wrong_answers(self, kitchen, ontology):
        records = {"q": {"imageId": "kitchen1"}}
        sidecar = [{"questionId": "q", "entailed": [{"semantic": "select: apple/exist", "answer": "no"}]}]
        checked, failures = check_soundness(sidecar, records, {"kitchen1": kitchen}, ontology)
        assert checked == 1 and len(failures) == 1

    def test_bad_rule_output_rejected(self, kitchen, ontology):
        from sgqa.entailment import EntailmentRule
        rule = EntailmentRule("exist", "yes", ("logicOr",),
                              lambda ctx, p, root, a: [(parse_program("select: apple/query: color"), "red")], "bad")
        with pytest.raises(ValueError, match="bad"):
            entail("select: apple/exist", "yes", _ctx(kitchen, ontology), [rule])
