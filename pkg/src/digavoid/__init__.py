"""Reductions, gadgets and exact oracles for avoidable digraphs."""

from .digraph import Digraph, MultiDigraph, build_digraph, degree_stats, min_out_degree, out_core
from .errors import DigavoidError
from .patterns import Pattern, cycle_orientation, find_pattern, pattern_from_name

__all__ = [
    "Digraph",
    "MultiDigraph",
    "build_digraph",
    "degree_stats",
    "min_out_degree",
    "out_core",
    "DigavoidError",
    "Pattern",
    "cycle_orientation",
    "find_pattern",
    "pattern_from_name",
]

__version__ = "0.1.0"
