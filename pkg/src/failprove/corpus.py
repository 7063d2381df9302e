"""Bundled benchmark problems and their reference properties."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .preinterp import CellIndex, assignment_count
from .syntax import Program, extract_signature, parse_program


class UnknownProblemError(KeyError):
    pass


@dataclass(frozen=True)
class Facts:
    """Reference properties of a problem at its domain size ``m``.

    ``failing`` says whether some pre-interpretation of size ``m`` makes
    the query fail; when it does, ``m`` is the smallest such size.
    ``atoms`` (ground atoms of an interpretation) is kept for reference only.
    """

    predicates: int
    m: int
    cells: int
    atoms: int
    failing: bool = True


FACTS: dict[str, Facts | None] = {
    "evenodd": None,
    "appendlast": Facts(2, 3, 12, 13),
    "reverselast": Facts(2, 3, 12, 13),
    "nreverselast": Facts(3, 5, 28, 150),
    "multiset1o": Facts(1, 2, 7, 4),
    "multiset2o": Facts(1, 2, 7, 4),
    "multiset3o": Facts(1, 2, 7, 4, failing=False),
    "blockpair2o": Facts(3, 2, 19, 12),
    "blockpair3o": Facts(3, 2, 36, 20),
    "blockpair2l": Facts(5, 2, 19, 32),
    "blockpair3l": Facts(5, 2, 36, 40),
    "blockzero2o": Facts(3, 2, 19, 12),
    "blockzero3o": Facts(3, 2, 35, 20),
    "blockzero2l": Facts(5, 2, 19, 32),
    "blockzero3l": Facts(5, 2, 35, 40),
    "blockzero2ls": Facts(5, 2, 19, 32, failing=False),
    "tba": Facts(1, 3, 32, 9),
    "grp": Facts(1, 2, 17, 4),
    "cl3": Facts(1, 3, 12, 9),
}

NAMES = tuple(FACTS)


@dataclass(frozen=True)
class CorpusProblem:
    name: str
    source: str
    program: Program
    facts: Facts | None

    @property
    def mode(self) -> str:
        return self.program.mode

    def cell_count(self, m: int | None = None) -> int:
        return len(CellIndex(extract_signature(self.program), m or self.facts.m))

    def preinterpretation_count(self, m: int | None = None) -> int:
        return assignment_count(extract_signature(self.program), m or self.facts.m)


def problem_source(name: str) -> str:
    if name not in FACTS:
        raise UnknownProblemError(f"unknown problem {name!r}; known: {', '.join(NAMES)}")
    return resources.files(__package__).joinpath("problems", f"{name}.pl").read_text()


def load_corpus(name: str) -> CorpusProblem:
    source = problem_source(name)
    return CorpusProblem(name, source, parse_program(source), FACTS[name])
