import pytest

from sgqa.generator import GenContext, default_patterns_path, generate_corpus, load_patterns
from sgqa.ontology import demo_ontology
from sgqa.scenegraph import build_plausibility, default_scene_dir, load_scene_config, normalize, read_graphs
from sgqa.cli import default_graphs_path

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_acceptance(number: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (name, passed, detail)
    print(f"criterion {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} {name}: {'PASS' if passed else 'FAIL'} ({detail})")


@pytest.fixture(scope="session")
def ontology():
    return demo_ontology()


@pytest.fixture(scope="session")
def scene_config():
    return load_scene_config(default_scene_dir())


@pytest.fixture(scope="session")
def demo_graphs(ontology, scene_config):
    return read_graphs(default_graphs_path(), ontology, scene_config)


@pytest.fixture(scope="session")
def demo_table(demo_graphs, ontology):
    return build_plausibility(demo_graphs, ontology)


@pytest.fixture(scope="session")
def patterns():
    return load_patterns(default_patterns_path())


@pytest.fixture(scope="session")
def gen_context(ontology, demo_table, scene_config):
    return GenContext(ontology, demo_table, scene_config.unannotated)


@pytest.fixture(scope="session")
def demo_corpus(demo_graphs, patterns, gen_context):
    return [q.to_record() for q in generate_corpus(demo_graphs, patterns, gen_context, seed=0)]


@pytest.fixture(scope="session")
def graphs_by_id(demo_graphs):
    return {g.image_id: g for g in demo_graphs}


# A small hand-built kitchen scene used across module tests.
#
#   boy (left)     apple  plate/banana         girl (right)
#                  ------ table ---------
KITCHEN = {
    "imageId": "kitchen1",
    "width": 640,
    "height": 480,
    "location": "kitchen",
    "objects": {
        "1": {"name": "table", "x": 100, "y": 250, "w": 400, "h": 150,
              "attributes": ["brown", "wooden", "round"], "relations": []},
        "2": {"name": "apple", "x": 150, "y": 200, "w": 50, "h": 50, "attributes": ["red", "small"],
              "relations": [{"name": "on", "object": "1"}]},
        "3": {"name": "plate", "x": 300, "y": 210, "w": 120, "h": 40, "attributes": ["white", "round"],
              "relations": [{"name": "on", "object": "1"}]},
        "4": {"name": "banana", "x": 320, "y": 190, "w": 60, "h": 20, "attributes": ["yellow"],
              "relations": [{"name": "on", "object": "3"}]},
        "5": {"name": "girl", "x": 520, "y": 50, "w": 80, "h": 300, "attributes": ["young", "tall", "standing"],
              "relations": [{"name": "wearing", "object": "6"}]},
        "6": {"name": "shirt", "x": 525, "y": 100, "w": 70, "h": 80, "attributes": ["blue"], "relations": []},
        "7": {"name": "boy", "x": 20, "y": 60, "w": 60, "h": 200, "attributes": ["young", "short", "sitting"],
              "relations": [{"name": "wearing", "object": "8"}]},
        "8": {"name": "shirt", "x": 25, "y": 100, "w": 50, "h": 60, "attributes": ["blue"], "relations": []},
    },
}


@pytest.fixture(scope="session")
def kitchen(ontology, scene_config):
    return normalize(KITCHEN, ontology, scene_config)
