"""Cells, components and pre-interpretations over a finite domain.

Cells are interned to integer ids in canonical order, the standard order of
terms: arity first, then functor name, then argument tuples lexicographically
(so ``zero`` comes before ``s(0)``).  A component ``<c, v>``
is encoded as the integer ``id(c) * m + v`` so that conflict sets can be
plain ``frozenset[int]`` values.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .syntax import Signature

Cell = tuple[str, tuple[int, ...]]
Component = tuple[Cell, int]


def functor_order(sig: Signature) -> list[tuple[str, int]]:
    return sorted(sig.functions, key=lambda fn: (fn[1], fn[0]))


def enumerate_cells(sig: Signature, m: int) -> list[Cell]:
    if m < 1:
        raise ValueError("domain size must be at least 1")
    return [
        (f, args)
        for f, n in functor_order(sig)
        for args in itertools.product(range(m), repeat=n)
    ]


def assignment_count(sig: Signature, m: int) -> int:
    """Number of pre-interpretations, ``m ** #cells`` (exact integer)."""
    return m ** sum(m**n for _, n in sig.functions)


def format_cell(cell: Cell) -> str:
    f, args = cell
    if not args:
        return f
    return f"{f}({','.join(map(str, args))})"


class CellIndex:
    """Bijection between the cells of a signature at domain size ``m`` and ``range(n)``."""

    def __init__(self, sig: Signature, m: int):
        if m < 1:
            raise ValueError("domain size must be at least 1")
        self.signature = sig
        self.m = m
        self.offset: dict[str, int] = {}
        self.arity: dict[str, int] = {}
        n = 0
        for f, k in functor_order(sig):
            self.offset[f] = n
            self.arity[f] = k
            n += m**k
        self.size = n
        self._cells = enumerate_cells(sig, m)

    def __len__(self) -> int:
        return self.size

    @property
    def cells(self) -> list[Cell]:
        return self._cells

    def id(self, functor: str, args: Sequence[int] = ()) -> int:
        if functor not in self.offset or len(args) != self.arity[functor]:
            raise KeyError(f"unknown cell {functor}/{len(args)}")
        i = 0
        for a in args:
            if not 0 <= a < self.m:
                raise KeyError(f"argument {a} outside domain of size {self.m}")
            i = i * self.m + a
        return self.offset[functor] + i

    def cell(self, cell_id: int) -> Cell:
        return self._cells[cell_id]

    def component(self, code: int) -> Component:
        return self._cells[code // self.m], code % self.m

    def encode(self, cell: Cell, value: int) -> int:
        return self.id(*cell) * self.m + value

    def format_component(self, code: int) -> str:
        cell, v = self.component(code)
        return f"{format_cell(cell)}={v}"

    def canonical(self, cs: Iterable[int]) -> list[Component]:
        return [self.component(c) for c in sorted(cs)]

    def format_cs(self, cs: Iterable[int]) -> str:
        return "{" + ", ".join(self.format_component(c) for c in sorted(cs)) + "}"


@dataclass(frozen=True)
class PreInterpretation:
    """A total map from cells to domain values, stored densely by cell id."""

    index: CellIndex
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.index):
            raise ValueError("pre-interpretation must assign every cell exactly once")
        m = self.index.m
        if any(not 0 <= v < m for v in self.values):
            raise ValueError("value outside the domain")

    @property
    def m(self) -> int:
        return self.index.m

    def lookup(self, cell: Cell) -> int:
        return self.values[self.index.id(*cell)]

    def components(self) -> frozenset[int]:
        m = self.index.m
        return frozenset(i * m + v for i, v in enumerate(self.values))

    def contains(self, cs: Iterable[int]) -> bool:
        m = self.index.m
        return all(self.values[c // m] == c % m for c in cs)

    def dump(self) -> str:
        """One ``functor(d1,...,dn) = v`` line per cell, in canonical order."""
        return "\n".join(
            f"{format_cell(c)} = {v}" for c, v in zip(self.index.cells, self.values)
        )

    def as_dict(self) -> dict[str, int]:
        return {format_cell(c): v for c, v in zip(self.index.cells, self.values)}

    @classmethod
    def from_mapping(cls, index: CellIndex, mapping: dict[Cell, int]) -> PreInterpretation:
        values = [0] * len(index)
        seen = set()
        for cell, v in mapping.items():
            i = index.id(*cell)
            values[i] = v
            seen.add(i)
        if len(seen) != len(index):
            raise ValueError("mapping does not cover every cell")
        return cls(index, tuple(values))

    @classmethod
    def uniform(cls, index: CellIndex, value: int = 0) -> PreInterpretation:
        return cls(index, (value,) * len(index))


def initial_value(seed: int, cell: Cell, m: int) -> int:
    """Seeded initial value of one cell.

    Derived from the cell's name rather than its position so that two
    programs sharing a cell draw the same initial value for it.
    """
    return random.Random(f"{seed}/{format_cell(cell)}").randrange(m)


def random_preinterpretation(index: CellIndex, seed: int) -> PreInterpretation:
    m = index.m
    return PreInterpretation(index, tuple(initial_value(seed, c, m) for c in index.cells))


def all_preinterpretations(index: CellIndex) -> Iterable[PreInterpretation]:
    """Every assignment, lexicographic over cells in canonical order."""
    for values in itertools.product(range(index.m), repeat=len(index)):
        yield PreInterpretation(index, values)


def random_completion(index: CellIndex, cs: Iterable[int], rng: random.Random) -> PreInterpretation:
    """A uniformly random pre-interpretation containing the components ``cs``."""
    m = index.m
    values = [rng.randrange(m) for _ in range(len(index))]
    for c in cs:
        values[c // m] = c % m
    return PreInterpretation(index, tuple(values))
