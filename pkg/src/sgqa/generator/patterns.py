"""Question pattern catalog.

One JSON object per line::

    {"group": "queryAttr",
     "program": "<ref>/query: <type>",
     "texts": ["(What|Which) <type> <is> <ref>?", "What is the <type> of <ref>?"],
     "answer": "<answer>",
     "fullAnswer": "<Ref> <is> <answer>.",
     "when": {"type": ["color"]},          # optional, matched against site conditions
     "derived": ["type"]}                  # optional, program holes not spoken in the text

``fullAnswer`` may instead map short answers to templates, e.g.
``{"yes": "Yes, ...", "no": "No, ..."}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..program import CATALOG
from .text import FIELD, parse_template, template_fields

PATTERN_FIELDS = {"group", "program", "texts", "answer", "fullAnswer", "when", "derived"}

# Fields filled in after execution, always available to answer templates.
ANSWER_FIELDS = {"answer", "answer_a", "answer_the"}


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    group: str
    program: str
    texts: tuple[str, ...]
    answer: str = "<answer>"
    full_answer: str | Mapping[str, str] = ""
    when: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    derived: tuple[str, ...] = ()

    def applies(self, conds: Mapping[str, str]) -> bool:
        return all(conds.get(k) in v for k, v in self.when.items())

    def full_template(self, answer: str) -> str:
        if isinstance(self.full_answer, str):
            return self.full_answer
        if answer in self.full_answer:
            return self.full_answer[answer]
        return self.full_answer.get("*", "<Answer>.")

    def program_holes(self) -> set[str]:
        return set(FIELD.findall(self.program))


def pattern_from_record(rec: Mapping, where: str = "") -> Pattern:
    extra = set(rec) - PATTERN_FIELDS
    if extra:
        raise PatternError(f"{where}unknown field(s) {sorted(extra)}")
    for key in ("group", "program", "texts", "fullAnswer"):
        if key not in rec:
            raise PatternError(f"{where}missing field {key!r}")
    group = rec["group"]
    if group not in CATALOG:
        raise PatternError(f"{where}unknown group {group!r}")
    texts = rec["texts"]
    if not isinstance(texts, list) or not texts:
        raise PatternError(f"{where}texts must be a non-empty list")
    full = rec["fullAnswer"]
    full = dict(full) if isinstance(full, Mapping) else full
    when = {k: tuple(v) if isinstance(v, list) else (v,) for k, v in rec.get("when", {}).items()}
    p = Pattern(group, rec["program"], tuple(texts), rec.get("answer", "<answer>"), full, when,
                tuple(rec.get("derived", ())))
    fulls = list(full.values()) if isinstance(full, dict) else [full]
    for t in (*texts, p.answer, *fulls):
        try:
            parse_template(t)
        except ValueError as e:
            raise PatternError(f"{where}{e}") from None
    spoken = set(p.derived)
    for t in texts:
        missing = p.program_holes() - {f.lower() for f in template_fields(t)} - spoken
        if missing:
            raise PatternError(f"{where}text {t!r} does not mention program hole(s) {sorted(missing)}")
    return p


def load_patterns(path: str | Path) -> list[Pattern]:
    patterns = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if line.strip():
                patterns.append(pattern_from_record(json.loads(line), f"{Path(path).name}:{n}: "))
    return patterns


def default_patterns_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "patterns.jsonl"
