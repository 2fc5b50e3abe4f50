import pytest

from sgqa.ontology import Concept, Hierarchy, Ontology, OntologyError, PlausibilityTable, SCENE


class TestNormalizeToken:
    def test_synonyms_collapse_to_one_id(self, ontology):
        assert ontology.normalize_token("guy") == "man"
        assert ontology.normalize_token("Gentleman") == "man"
        assert ontology.normalize_token("puppy") == "dog"

    def test_typos_are_corrected(self, ontology):
        assert ontology.normalize_token("whtie") == "white"
        assert ontology.normalize_token("tabel") == "table"

    def test_stopwords_dropped(self, ontology):
        assert ontology.normalize_token("the apple") == "apple"
        assert ontology.normalize_token("  THE   Apple ") == "apple"

    def test_multiword_relation_survives_stopword_removal(self, ontology):
        assert ontology.normalize_token("to the left of") == "to the left of"

    def test_unknown_token(self, ontology):
        assert ontology.normalize_token("flux capacitor") is None
        assert ontology.normalize_token("the") is None


class TestHierarchy:
    def test_is_a_follows_ancestors(self, ontology):
        assert ontology.is_a("apple", "fruit")
        assert ontology.is_a("apple", "food")
        assert ontology.is_a("apple", "apple")
        assert not ontology.is_a("apple", "animal")

    def test_members(self, ontology):
        fruit = ontology.members("fruit")
        assert "apple" in fruit and "banana" in fruit
        assert fruit == sorted(fruit)
        assert all(ontology.kind_of(c) == "attribute" for c in ontology.members("color"))

    def test_two_parents_rejected(self):
        with pytest.raises(OntologyError):
            Hierarchy.from_pairs([("a", "root"), ("a", "other"), ("other", "root")])

    def test_cycle_rejected(self):
        with pytest.raises(OntologyError):
            Hierarchy.from_pairs([("a", "b"), ("b", "a")])

    def test_single_root_required(self):
        with pytest.raises(OntologyError):
            Hierarchy.from_pairs([("a", "r1"), ("b", "r2")])


class TestBuild:
    def _tree(self):
        return [("object", "concept"), ("attribute", "concept"), ("color", "attribute"), ("fruit", "object")]

    def test_duplicate_synonym_rejected(self):
        concepts = [
            Concept("apple", "object", "fruit", ("pome",)),
            Concept("pear", "object", "fruit", ("pome",)),
        ]
        with pytest.raises(OntologyError, match="pome"):
            Ontology.build(concepts, self._tree())

    def test_dangling_category_rejected(self):
        with pytest.raises(OntologyError, match="dangling"):
            Ontology.build([Concept("apple", "object", "vegetable")], self._tree())

    def test_inverses_are_symmetric(self, ontology):
        assert ontology.inverses["to the left of"] == "to the right of"
        assert ontology.inverses["to the right of"] == "to the left of"

    def test_exclusions_are_symmetric(self, ontology):
        assert ontology.excluded("pink", "red") and ontology.excluded("red", "pink")

    def test_orders_and_comparatives(self, ontology):
        assert ontology.rank("size", "tiny") < ontology.rank("size", "small")
        assert ontology.comparatives["height"] == ("taller", "shorter")

    def test_attribute_type(self, ontology):
        assert ontology.attribute_type("red") == "color"
        with pytest.raises(OntologyError):
            ontology.attribute_type("apple")


class TestPlausibility:
    def test_counts_threshold(self, ontology):
        t = PlausibilityTable(ontology)
        t.add("apple", "green")
        assert t.plausible("apple", "green")
        assert not t.plausible("apple", "purple")
        assert t.count("apple", "green") == 1

    def test_unknown_name_raises(self, ontology):
        t = PlausibilityTable(ontology)
        with pytest.raises(OntologyError):
            t.plausible("unicorn", "green")

    def test_scene_subject_allowed(self, ontology):
        t = PlausibilityTable(ontology)
        t.add(SCENE, "kitchen")
        assert t.plausible(SCENE, "kitchen")

    def test_negative_count_rejected(self, ontology):
        with pytest.raises(ValueError):
            PlausibilityTable(ontology).add("apple", "red", -1)

    def test_demo_table(self, demo_table):
        assert demo_table.plausible("apple", "red")
        assert demo_table.plausible("fruit", "apple")
        assert not demo_table.plausible("apple", "purple")
