import random
import re
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from sgqa.generator import GenContext, generate_corpus, generate_graph
from sgqa.generator.decoys import NoDecoyAvailable, Slot, decoy_weights, select_decoy
from sgqa.generator.engine import fill_program, graph_seed
from sgqa.generator.patterns import PatternError, pattern_from_record
from sgqa.generator.references import build_references
from sgqa.generator.text import (
    TemplateError,
    indefinite,
    parse_template,
    realize,
    tokenize,
)
from sgqa.ontology import PlausibilityTable
from sgqa.program import CATALOG, answer_text, execute, parse_program, resolve


class TestTemplates:
    def test_fields_and_capitalization(self):
        text, spans = realize("what color is <ref>?", {"ref": (("the apple", "2"),)}, random.Random(0))
        assert text == "What color is the apple?"
        assert spans == {"3:5": "2"}

    def test_capitalized_field_name(self):
        text, _ = realize("<Ref> is red.", {"ref": "the apple"}, random.Random(0))
        assert text == "The apple is red."

    def test_optional_and_alternates_cover_all_forms(self):
        seen = {realize("(Is|Are) it [really] here?", {}, random.Random(i))[0] for i in range(60)}
        assert seen == {"Is it here?", "Is it really here?", "Are it here?", "Are it really here?"}

    @pytest.mark.parametrize("bad", ["[unclosed", "(a|b", "a)b", "(a||b)", "<1bad>"])
    def test_malformed_templates(self, bad):
        with pytest.raises(TemplateError):
            parse_template(bad)

    def test_unfilled_field(self):
        with pytest.raises(TemplateError, match="unfilled"):
            realize("<ref>", {}, random.Random(0))

    def test_indefinite_articles(self, ontology):
        assert indefinite(ontology, "apple") == "an apple"
        assert indefinite(ontology, "banana") == "a banana"
        assert indefinite(ontology, "pants") == "pants"
        assert indefinite(ontology, "apple", "old apple") == "an old apple"
        assert indefinite(ontology, "apple", "red apple") == "a red apple"

    def test_fill_program_requires_bindings(self):
        assert fill_program("select: <o>/exist", {"o": "apple"}) == "select: apple/exist"
        with pytest.raises(KeyError):
            fill_program("select: <o>/exist", {})


words = st.text(alphabet="abcdefg ", min_size=1, max_size=8).filter(str.strip)


@st.composite
def templates(draw):
    parts = []
    for _ in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(["text", "field", "opt", "alt"]))
        if kind == "text":
            parts.append(draw(words))
        elif kind == "field":
            parts.append("<ref>")
        elif kind == "opt":
            parts.append(f"[{draw(words)}]")
        else:
            parts.append("(" + "|".join(draw(st.lists(words, min_size=2, max_size=3))) + ")")
    return " ".join(parts)


@settings(max_examples=200, deadline=None)
@given(templates(), st.integers(0, 2**32))
def test_realized_text_has_no_template_syntax(template, seed):
    text, spans = realize(template + "?", {"ref": (("the apple", "7"),)}, random.Random(seed))
    assert not re.search(r"[<>\[\]()|]", text)
    assert "  " not in text
    tokens = tokenize(text)
    for key, oid in spans.items():
        start, _, end = key.partition(":")
        span = tokens[int(start):int(end or int(start) + 1)]
        assert " ".join(span).lower() == "the apple" and oid == "7"


class TestPatterns:
    def test_unknown_field_rejected(self):
        with pytest.raises(PatternError):
            pattern_from_record({"group": "exist", "program": "select: <o>/exist", "texts": ["x"],
                                 "answer": "<answer>", "bogus": 1})

    def test_bundled_patterns_cover_catalog(self, patterns):
        assert {p.group for p in patterns} == set(CATALOG)


class TestReferences:
    def test_references_resolve_to_their_target(self, kitchen, ontology):
        for oid in kitchen.objects:
            for ref in build_references(kitchen, oid, ontology):
                assert resolve(ref.prefix, kitchen, ontology) == frozenset({oid})

    def test_ambiguous_noun_needs_a_modifier(self, kitchen, ontology):
        surfaces = [r.surface for r in build_references(kitchen, "8", ontology)]
        assert surfaces and "the shirt" not in surfaces

    def test_unique_noun_is_direct(self, kitchen, ontology):
        refs = build_references(kitchen, "2", ontology)
        assert refs[0].surface == "the apple" and refs[0].kind == "direct"

    def test_depth_zero_has_no_relations(self, kitchen, ontology):
        assert all(r.hops == 0 for r in build_references(kitchen, "8", ontology, max_depth=0))


class TestDecoys:
    def test_decoy_is_plausible_and_false(self, kitchen, ontology, demo_table):
        slot = Slot("attribute", "color")
        weights = decoy_weights(kitchen, "2", slot, "red", ontology, demo_table)
        assert weights and "red" not in weights
        assert all(demo_table.plausible("apple", c) for c in weights)
        decoy = select_decoy(kitchen, "2", slot, "red", random.Random(0), ontology, demo_table)
        assert decoy in weights

    def test_no_decoy_available(self, kitchen, ontology):
        with pytest.raises(NoDecoyAvailable):
            select_decoy(kitchen, "2", Slot("attribute", "color"), "red", random.Random(0),
                         ontology, PlausibilityTable(ontology))


class TestEngine:
    def test_kitchen_questions_are_sound(self, kitchen, patterns, gen_context, ontology):
        questions, _ = generate_graph(kitchen, patterns, gen_context, seed=0)
        assert questions
        for q in questions:
            assert answer_text(execute(parse_program(q.semantic), kitchen, ontology)) == q.answer

    def test_generation_is_deterministic(self, demo_graphs, patterns, gen_context):
        a = [q.to_record() for q in generate_corpus(demo_graphs[:5], patterns, gen_context, seed=3)]
        b = [q.to_record() for q in generate_corpus(demo_graphs[:5], patterns, gen_context, seed=3)]
        assert a == b
        c = [q.to_record() for q in generate_corpus(demo_graphs[:5], patterns, gen_context, seed=4)]
        assert a != c

    def test_workers_do_not_change_output(self, demo_graphs, patterns, gen_context):
        one = [q.to_record() for q in generate_corpus(demo_graphs[:6], patterns, gen_context, seed=0)]
        two = [q.to_record() for q in generate_corpus(demo_graphs[:6], patterns, gen_context, seed=0, workers=2)]
        assert one == two

    def test_graph_seed_depends_on_image(self):
        assert graph_seed(0, "a") != graph_seed(0, "b")
        assert graph_seed(0, "a") == graph_seed(0, "a")

    def test_records_are_complete(self, demo_corpus):
        ids = [r["questionId"] for r in demo_corpus]
        assert len(set(ids)) == len(ids)
        for r in demo_corpus[:500]:
            assert set(r) >= {"questionId", "imageId", "question", "semantic", "answer", "fullAnswer",
                              "types", "groups", "annotations", "seed"}
            assert r["question"][0].isupper() and r["question"].endswith("?")
            assert r["groups"]["local"].endswith(r["groups"]["global"])

    def test_annotations_point_at_object_mentions(self, demo_corpus, graphs_by_id):
        for r in demo_corpus[:500]:
            tokens = tokenize(r["question"])
            for key, oid in r["annotations"]["question"].items():
                start, _, end = key.partition(":")
                assert int(end or int(start) + 1) <= len(tokens)
                assert oid in graphs_by_id[r["imageId"]].objects

    def test_no_template_artifacts(self, demo_corpus):
        bad = re.compile(r"[<>\[\]|]|\ba [aeiou]|\ban [^aeiou ]|  ")
        assert [r["question"] for r in demo_corpus if bad.search(r["question"])] == []

    def test_every_type_generated(self, demo_corpus):
        assert set(Counter(r["types"]["detailed"] for r in demo_corpus)) == set(CATALOG)

    def test_binary_answers_are_not_all_yes(self, demo_corpus):
        binary = Counter(r["answer"] for r in demo_corpus if r["answer"] in ("yes", "no"))
        assert binary["no"] > 0.2 * sum(binary.values())

    def test_unknown_vocabulary_context(self, ontology, demo_table, scene_config):
        ctx = GenContext(ontology, demo_table, scene_config.unannotated)
        assert "sky" in ctx.unannotated
