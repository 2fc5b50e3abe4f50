import json
from pathlib import Path

import pytest

from sgqa.cli import default_graphs_path
from sgqa.demo import synthesize_demo_graphs
from sgqa.jsonl import RecordError, file_digest, read_jsonl, write_json, write_jsonl
from sgqa.scenegraph import iter_records, normalize

REAL = Path(default_graphs_path()).with_name("real_graphs.jsonl")


def test_bundled_demo_file_matches_synthesis():
    lines = default_graphs_path().read_text().splitlines()
    assert [json.loads(line) for line in lines] == synthesize_demo_graphs()


def test_demo_graphs_carry_annotation_noise(demo_graphs):
    assert sum(g.dropped for g in demo_graphs) > 0


def test_real_records_use_wrapped_layout(ontology, scene_config):
    records = list(iter_records(REAL))
    assert len(records) == 5
    for rec in records:
        (image_id, body), = rec.items()
        assert "objects" in body
        g = normalize(rec, ontology, scene_config)
        assert g.image_id == image_id and g.objects


class TestJsonl:
    def test_round_trip(self, tmp_path):
        rows = [{"a": 1, "b": "é"}, {"a": 2}]
        assert write_jsonl(tmp_path / "x.jsonl", rows) == 2
        assert list(read_jsonl(tmp_path / "x.jsonl")) == rows

    def test_blank_lines_skipped(self, tmp_path):
        (tmp_path / "x.jsonl").write_text('{"a": 1}\n\n{"a": 2}\n')
        assert len(list(read_jsonl(tmp_path / "x.jsonl"))) == 2

    def test_bad_line_reports_location(self, tmp_path):
        (tmp_path / "x.jsonl").write_text('{"a": 1}\n{oops\n')
        with pytest.raises(RecordError, match=":2:"):
            list(read_jsonl(tmp_path / "x.jsonl"))

    def test_json_is_canonical(self, tmp_path):
        write_json(tmp_path / "a.json", {"b": 1, "a": 2})
        write_json(tmp_path / "b.json", {"a": 2, "b": 1})
        assert file_digest(tmp_path / "a.json") == file_digest(tmp_path / "b.json")
