"""Parsing, type checking and serialization of question programs.

A program is a ``/``-separated chain of steps::

    select: table/filter: white/relate(subject, on): apple/query: color

Each step is ``op[(args)][ typeArg][: operand('|'operand)*]``.  ``verify`` is
the surface spelling of ``verifyAttr``; for ``query`` the colon operand is the
queried type (``query: color``, ``query: name``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

DIRECTIONS = ("subject", "object")

# Stack value kinds used by the type checker.
SET, SCENE_VAL, BOOL, STR = "set", "scene", "bool", "str"

SCENE = "scene"
ALL_OBJECTS = "allObjs"
WILDCARD = "_"

SURFACE = {"verifyAttr": "verify"}
ALIASES = {"verify": "verifyAttr"}

OPS = (
    "select", "filter", "relate", "verifyAttr", "verifyRel", "query", "choose",
    "chooseRel", "exist", "and", "or", "not", "compare", "common", "same", "different",
)

_STEP = re.compile(
    r"^(?P<op>[A-Za-z]+)\s*"
    r"(?:\((?P<args>[^()]*)\))?\s*"
    r"(?P<type>[A-Za-z_]+)?\s*"
    r"(?::\s*(?P<operands>.*?))?\s*$"
)


class ProgramError(ValueError):
    """Malformed or ill-typed program; ``step`` is the 1-based failing step."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        self.reason = message
        super().__init__(f"step {step}: {message}" if step is not None else message)


@dataclass(frozen=True)
class Step:
    op: str
    type_arg: str | None = None
    operands: tuple[str, ...] = ()
    direction: str | None = None
    relations: tuple[str, ...] = ()

    def __str__(self) -> str:
        return serialize_step(self)


@dataclass(frozen=True)
class Program:
    steps: tuple[Step, ...]

    def __str__(self) -> str:
        return serialize_program(self)

    def __len__(self) -> int:
        return len(self.steps)

    def __add__(self, other: "Program") -> "Program":
        return Program(self.steps + other.steps)


# --------------------------------------------------------------------------
# serialization


def serialize_step(step: Step) -> str:
    text = SURFACE.get(step.op, step.op)
    if step.op in ("relate", "verifyRel", "chooseRel"):
        args = ([step.direction] if step.direction else []) + ["|".join(step.relations)]
        text += "(" + ", ".join(args) + ")"
    if step.op == "query":
        return f"{text}: {step.type_arg}"
    if step.type_arg:
        text += " " + step.type_arg
    if step.operands:
        text += ": " + "|".join(step.operands)
    return text


def serialize_program(program: Program) -> str:
    return "/".join(serialize_step(s) for s in program.steps)


# --------------------------------------------------------------------------
# parsing


def _split_operands(text: str | None) -> tuple[str, ...]:
    if text is None or text == "":
        return ()
    return tuple(o.strip() for o in text.split("|"))


def parse_step(text: str, index: int = 1) -> Step:
    m = _STEP.match(text.strip())
    if not m:
        raise ProgramError(f"cannot parse {text.strip()!r}", index)
    op = ALIASES.get(m["op"], m["op"])
    if op not in OPS:
        raise ProgramError(f"unknown op {m['op']!r}", index)
    type_arg = m["type"]
    operands = _split_operands(m["operands"])
    if any(o == "" for o in operands):
        raise ProgramError(f"{op} has an empty operand", index)
    args = m["args"]
    if args is not None and op not in ("relate", "verifyRel", "chooseRel"):
        raise ProgramError(f"{op} takes no parenthesized arguments", index)

    direction = None
    relations: tuple[str, ...] = ()
    if op in ("relate", "verifyRel", "chooseRel"):
        if args is None:
            raise ProgramError(f"{op} requires a relation argument", index)
        parts = [p.strip() for p in args.split(",")]
        if len(parts) == 2:
            direction = parts[0]
            if direction not in DIRECTIONS:
                raise ProgramError(f"unknown direction {direction!r}", index)
            parts = parts[1:]
        if len(parts) != 1 or not parts[0]:
            raise ProgramError(f"{op} expects ([direction, ]relation)", index)
        relations = tuple(r.strip() for r in parts[0].split("|"))
        if any(not r for r in relations):
            raise ProgramError(f"{op} has an empty relation", index)
        want = 2 if op == "chooseRel" else 1
        if len(relations) != want:
            raise ProgramError(f"{op} expects {want} relation(s), got {len(relations)}", index)
        if type_arg is not None:
            raise ProgramError(f"{op} takes no type argument", index)

    if op == "query":
        if type_arg is not None or len(operands) != 1:
            raise ProgramError("query expects exactly one type, as 'query: type'", index)
        return Step(op, type_arg=operands[0])

    arity = {
        "select": (1, 1), "filter": (1, 1), "relate": (1, 1), "verifyAttr": (1, 1),
        "verifyRel": (1, 1), "choose": (2, 2), "chooseRel": (1, 1), "compare": (1, 1),
        "exist": (0, 0), "and": (0, 0), "or": (0, 0), "not": (0, 0), "common": (0, 0),
        "same": (0, 0), "different": (0, 0),
    }[op]
    if not arity[0] <= len(operands) <= arity[1]:
        raise ProgramError(f"{op} expects {arity[0]} operand(s), got {len(operands)}", index)
    typed = {"filter", "verifyAttr", "choose", "compare", "same", "different"}
    if type_arg is not None and op not in typed:
        raise ProgramError(f"{op} takes no type argument", index)
    if op == "compare" and type_arg is None:
        raise ProgramError("compare requires a type argument", index)
    return Step(op, type_arg, operands, direction, relations)


def typecheck(steps: tuple[Step, ...]) -> list[str]:
    """Simulate the value stack; return the final stack kinds or raise."""
    stack: list[str] = []

    def pop(i: int, op: str, allowed: tuple[str, ...], what: str) -> str:
        if not stack or stack[-1] not in allowed:
            raise ProgramError(f"{op} requires {what}", i)
        return stack.pop()

    for i, s in enumerate(steps, 1):
        op = s.op
        if op == "select":
            stack.append(SCENE_VAL if s.operands[0] == SCENE else SET)
        elif op in ("filter", "relate"):
            pop(i, op, (SET,), "an object set")
            stack.append(SET)
        elif op in ("exist", "verifyRel"):
            pop(i, op, (SET,), "an object set")
            stack.append(BOOL)
        elif op == "verifyAttr":
            kind = pop(i, op, (SET, SCENE_VAL), "an object set or the scene")
            if kind == SCENE_VAL and not s.type_arg:
                raise ProgramError("verify on the scene requires a type", i)
            stack.append(BOOL)
        elif op in ("query", "choose"):
            pop(i, op, (SET, SCENE_VAL), "an object set or the scene")
            stack.append(STR)
        elif op == "chooseRel":
            pop(i, op, (SET,), "an object set")
            stack.append(STR)
        elif op in ("and", "or"):
            if len(stack) < 2 or stack[-1] != BOOL or stack[-2] != BOOL:
                raise ProgramError(f"{op} requires two boolean operands", i)
            stack[-2:] = [BOOL]
        elif op == "not":
            pop(i, op, (BOOL,), "a boolean operand")
            stack.append(BOOL)
        elif op in ("compare", "common"):
            if len(stack) < 2 or stack[-1] != SET or stack[-2] != SET:
                raise ProgramError(f"{op} requires two object sets", i)
            stack[-2:] = [STR]
        elif op in ("same", "different"):
            if len(stack) >= 2 and stack[-1] == SET and stack[-2] == SET:
                stack[-2:] = [BOOL]
            else:
                pop(i, op, (SET,), "one or two object sets")
                stack.append(BOOL)
    return stack


def parse_program(text: str) -> Program:
    """Parse and type-check a serialized program."""
    if not text or not text.strip():
        raise ProgramError("empty program")
    steps = tuple(parse_step(part, i) for i, part in enumerate(text.split("/"), 1))
    return check_program(Program(steps))


def check_program(program: Program) -> Program:
    stack = typecheck(program.steps)
    n = len(program.steps)
    if len(stack) != 1:
        raise ProgramError(f"program leaves {len(stack)} values on the stack, expected 1", n)
    if stack[0] not in (BOOL, STR):
        raise ProgramError("program must end in a boolean or an answer", n)
    return program


def is_binary_same(steps: tuple[Step, ...], index: int) -> bool:
    """Whether the same/different step at 0-based ``index`` compares two sets."""
    stack = typecheck(steps[:index])
    return len(stack) >= 2 and stack[-1] == SET and stack[-2] == SET
