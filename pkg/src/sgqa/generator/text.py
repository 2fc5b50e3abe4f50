"""Template realization, agreement helpers and token-span bookkeeping.

Template syntax: ``<field>`` holes, ``[optional]`` segments and ``(a|b)``
alternates, freely nested.  A field written with a leading capital
(``<Ref>``) is filled with the capitalized value of ``ref``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from ..ontology import Ontology

# A phrase is a sequence of (text, object id or None) chunks; the ids drive
# the grounding annotations.
Chunk = tuple[str, Union[str, None]]
Phrase = tuple[Chunk, ...]
FieldValue = Union[str, Phrase]

_TOKEN = re.compile(r"[\w']+|[^\w\s]")
FIELD = re.compile(r"<([A-Za-z_][A-Za-z0-9_]*)>")

CATEGORY_PLURALS = {
    "food": "food", "fruit": "fruit", "people": "people", "clothing": "clothing",
    "furniture": "furniture", "kitchenware": "kitchenware", "scenery": "scenery",
    "body part": "body parts",
}


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class _Text:
    text: str


@dataclass(frozen=True)
class _Field:
    name: str


@dataclass(frozen=True)
class _Opt:
    body: tuple


@dataclass(frozen=True)
class _Alt:
    options: tuple


def parse_template(template: str) -> tuple:
    """Parse a template into a nested sequence of nodes."""
    pos = 0

    def seq(stop: str) -> tuple:
        nonlocal pos
        out: list = []
        buf = ""
        while pos < len(template):
            ch = template[pos]
            if ch in stop:
                break
            if ch == "<":
                end = template.find(">", pos)
                if end < 0 or not FIELD.fullmatch(template[pos:end + 1]):
                    raise TemplateError(f"bad field at {pos} in {template!r}")
                if buf:
                    out.append(_Text(buf))
                    buf = ""
                out.append(_Field(template[pos + 1:end]))
                pos = end + 1
            elif ch == "[":
                if buf:
                    out.append(_Text(buf))
                    buf = ""
                pos += 1
                body = seq("]")
                if pos >= len(template) or template[pos] != "]":
                    raise TemplateError(f"unclosed '[' in {template!r}")
                pos += 1
                out.append(_Opt(body))
            elif ch == "(":
                if buf:
                    out.append(_Text(buf))
                    buf = ""
                pos += 1
                options = [seq("|)")]
                while pos < len(template) and template[pos] == "|":
                    pos += 1
                    options.append(seq("|)"))
                if pos >= len(template) or template[pos] != ")":
                    raise TemplateError(f"unclosed '(' in {template!r}")
                pos += 1
                if any(not o for o in options):
                    raise TemplateError(f"empty alternate in {template!r}")
                out.append(_Alt(tuple(options)))
            elif ch in "])|":
                raise TemplateError(f"unbalanced {ch!r} in {template!r}")
            else:
                buf += ch
                pos += 1
        if buf:
            out.append(_Text(buf))
        return tuple(out)

    nodes = seq("")
    if pos != len(template):
        raise TemplateError(f"unbalanced {template[pos]!r} in {template!r}")
    return nodes


def template_fields(template: str) -> set[str]:
    return set(FIELD.findall(template))


def _walk(nodes: tuple, rng: random.Random, out: list) -> None:
    for n in nodes:
        if isinstance(n, _Text):
            out.append(n)
        elif isinstance(n, _Field):
            out.append(n)
        elif isinstance(n, _Opt):
            if rng.random() < 0.5:
                _walk(n.body, rng, out)
        else:
            _walk(n.options[rng.randrange(len(n.options))], rng, out)


def _field_phrase(name: str, fields: Mapping[str, FieldValue]) -> Phrase:
    key = name
    cap = False
    if key not in fields and key[0].isupper() and key[0].lower() + key[1:] in fields:
        key, cap = key[0].lower() + key[1:], True
    if key not in fields:
        raise TemplateError(f"unfilled field <{name}>")
    value = fields[key]
    phrase: Phrase = ((value, None),) if isinstance(value, str) else tuple(value)
    if cap and phrase:
        first, oid = phrase[0]
        phrase = ((capitalize(first), oid),) + phrase[1:]
    spaced: list[Chunk] = []
    for i, chunk in enumerate(phrase):
        if i:
            spaced.append((" ", None))
        spaced.append(chunk)
    return tuple(spaced)


def realize(template: str, fields: Mapping[str, FieldValue], rng: random.Random) -> tuple[str, dict[str, str]]:
    """Realize ``template`` and return (text, token-span annotations).

    Annotation keys are ``"start:end"`` token spans (end exclusive) under
    :func:`tokenize`, or ``"i"`` for single tokens.
    """
    picked: list = []
    _walk(parse_template(template), rng, picked)
    chunks: list[Chunk] = []
    for n in picked:
        if isinstance(n, _Text):
            chunks.append((n.text, None))
        else:
            chunks.extend(_field_phrase(n.name, fields))
    return assemble(chunks)


def assemble(chunks: Sequence[Chunk]) -> tuple[str, dict[str, str]]:
    text = ""
    spans: dict[str, str] = {}
    count = 0
    for piece, oid in chunks:
        n = len(_TOKEN.findall(piece))
        if oid is not None and n:
            key = str(count) if n == 1 else f"{count}:{count + n}"
            spans[key] = oid
        count += n
        text += piece
    text = tidy(text)
    if text:
        text = capitalize(text)
    return text, spans


def tidy(text: str) -> str:
    text = re.sub(r"\s+", " ", text).strip()
    return re.sub(r"\s+([?.,!])", r"\1", text)


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def capitalize(text: str) -> str:
    return text[:1].upper() + text[1:]


def indefinite(ontology: Ontology, concept: str, words: str | None = None) -> str:
    """``words`` (default the concept) with the concept's indefinite article."""
    words = words or concept
    c = ontology.concepts.get(concept)
    if c is not None and c.article == "none":
        return words
    if words == concept and c is not None:
        art = c.article
    else:
        art = "an" if words[:1].lower() in "aeiou" else "a"
    return f"{art} {words}"


def plural(ontology: Ontology, name: str) -> str:
    if name in ontology.concepts:
        return ontology[name].plural_form
    return CATEGORY_PLURALS.get(name, name + "s")


def is_plural_noun(ontology: Ontology, concept: str) -> bool:
    c = ontology.concepts.get(concept)
    return c is not None and c.pos == "NNS"


def copula(ontology: Ontology, concept: str) -> str:
    return "are" if is_plural_noun(ontology, concept) else "is"
