from .decoys import NoDecoyAvailable, Slot, decoy_weights, select_decoy
from .engine import (
    DISCLOSES,
    MULTIPLE,
    REPEATS,
    QAInstance,
    Rejection,
    fill_program,
    generate_corpus,
    generate_graph,
    graph_seed,
    instantiate,
)
from .patterns import Pattern, PatternError, default_patterns_path, load_patterns, pattern_from_record
from .references import Reference, ReferenceBuilder, build_references
from .sites import BINDERS, Binding, GenContext, GraphSites
from .text import realize, tokenize

__all__ = [
    "BINDERS", "DISCLOSES", "MULTIPLE", "REPEATS", "Binding", "GenContext", "GraphSites",
    "NoDecoyAvailable", "Pattern", "PatternError", "QAInstance", "Reference", "ReferenceBuilder",
    "Rejection", "Slot", "build_references", "decoy_weights", "default_patterns_path", "fill_program",
    "generate_corpus", "generate_graph", "graph_seed", "instantiate", "load_patterns",
    "pattern_from_record", "realize", "select_decoy", "tokenize",
]
