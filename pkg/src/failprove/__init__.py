"""Proving failure of logic programs by searching finite pre-interpretations."""

from .corpus import load_corpus
from .engine import evaluate
from .oracle import exhaustive_verdict, least_model
from .preinterp import CellIndex, PreInterpretation
from .search import SearchConfig, prove, search
from .syntax import Program, ProgramError, parse_program
from .transform import compile_program, instrument

__all__ = [
    "CellIndex",
    "PreInterpretation",
    "Program",
    "ProgramError",
    "SearchConfig",
    "compile_program",
    "evaluate",
    "exhaustive_verdict",
    "instrument",
    "least_model",
    "load_corpus",
    "parse_program",
    "prove",
    "search",
]

__version__ = "0.1.0"
