"""fdcc: a decision procedure for conjunctions over fixed-size arrays,
equalities and finite-domain arithmetic, run as a cooperation between a
congruence-closure engine and a propagation/search engine."""

from .formula import (ArrayDiff, ArrayEq, Diff, DiffArrayAtom, Eq, Formula,
                      LinearLeq, Mul, desugar_extensionality, dispatch)
from .oracle import GroundModel, oracle_eval, oracle_solve
from .parser import ParseError, format_formula, parse
from .supervisor import Config, SolveResult, Stats, solve, solve_text
from .terms import Term, TermTable, format_term

__all__ = [
    "ArrayDiff", "ArrayEq", "Config", "Diff", "DiffArrayAtom", "Eq",
    "Formula", "GroundModel", "LinearLeq", "Mul", "ParseError",
    "SolveResult", "Stats", "Term", "TermTable", "desugar_extensionality",
    "dispatch", "format_formula", "format_term", "oracle_eval",
    "oracle_solve", "parse", "solve", "solve_text",
]

__version__ = "0.1.0"
