"""Guarded Kleene algebra with tests: expressions, automata, equivalence and behaviour trees."""

from gkat._kernels import BACKEND
from gkat.automaton import Automaton, brzozowski, normalize, reconstruct
from gkat.bexp import AtomSet, TestDecl, parse_bexp
from gkat.equivalence import bisimilar, equiv, equiv0
from gkat.errors import GkatError
from gkat.syntax import Exp, parse, termination_set

__all__ = [
    "BACKEND",
    "AtomSet",
    "Automaton",
    "Exp",
    "GkatError",
    "TestDecl",
    "bisimilar",
    "brzozowski",
    "equiv",
    "equiv0",
    "normalize",
    "parse",
    "parse_bexp",
    "reconstruct",
    "termination_set",
]
