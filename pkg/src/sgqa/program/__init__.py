from .catalog import BINARY_TYPES, CATALOG, Node, TypeInfo, UnclassifiableProgram, build_tree, chain_of, classify
from .interpreter import (
    SCENE_MARKER,
    AmbiguousReference,
    EmptySelection,
    ExecutionError,
    MissingAttribute,
    answer_text,
    execute,
    resolve,
    run_steps,
)
from .parser import (
    ALL_OBJECTS,
    SCENE,
    WILDCARD,
    Program,
    ProgramError,
    Step,
    check_program,
    parse_program,
    parse_step,
    serialize_program,
    serialize_step,
)

__all__ = [
    "ALL_OBJECTS", "BINARY_TYPES", "CATALOG", "SCENE", "SCENE_MARKER", "WILDCARD",
    "AmbiguousReference", "EmptySelection", "ExecutionError", "MissingAttribute", "Node",
    "Program", "ProgramError", "Step", "TypeInfo", "UnclassifiableProgram",
    "answer_text", "build_tree", "chain_of", "check_program", "classify", "execute",
    "parse_program", "parse_step", "resolve", "run_steps", "serialize_program", "serialize_step",
]
