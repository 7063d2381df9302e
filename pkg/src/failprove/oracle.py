"""Brute-force ground truth: least models by naive bottom-up iteration.

Works directly on the source ``Program`` (no flattening), so it is an
independent check of the transformation and of the tabled engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .preinterp import CellIndex, PreInterpretation, all_preinterpretations
from .syntax import (
    EQUATIONAL,
    Clause,
    Program,
    Signature,
    Struct,
    Term,
    Var,
    extract_signature,
    variables,
)

GroundAtom = tuple[str, tuple[int, ...]]

DEFAULT_CAP = 10**6


class EnumerationCapExceeded(Exception):
    pass


def eval_term(t: Term, env: dict[str, int], j: PreInterpretation) -> int:
    """Term assignment of ``t`` under variable assignment ``env`` and ``j``."""
    if isinstance(t, Var):
        return env[t.name]
    return j.lookup((t.functor, tuple(eval_term(a, env, j) for a in t.args)))


def _ground(atom: Struct, env: dict[str, int], j: PreInterpretation) -> GroundAtom:
    return atom.functor, tuple(eval_term(a, env, j) for a in atom.args)


def _body_matches(
    body: tuple[Struct, ...], env: dict[str, int], model: set, j: PreInterpretation, m: int
) -> Iterator[dict[str, int]]:
    """All extensions of ``env`` making every body atom true in ``model``.

    Variables are assigned lazily, atom by atom, which prunes the brute-force
    enumeration early without changing its result.
    """
    if not body:
        yield env
        return
    atom, rest = body[0], body[1:]
    new = [v for v in variables(atom) if v not in env]
    for vals in itertools.product(range(m), repeat=len(new)):
        ext = dict(env)
        ext.update(zip(new, vals))
        if _ground(atom, ext, j) in model:
            yield from _body_matches(rest, ext, model, j, m)


def _consequences(c: Clause, model: set, j: PreInterpretation, m: int) -> Iterator[GroundAtom]:
    for env in _body_matches(c.body, {}, model, j, m):
        free = [v for v in variables(c.head) if v not in env]
        for vals in itertools.product(range(m), repeat=len(free)):
            ext = dict(env)
            ext.update(zip(free, vals))
            yield _ground(c.head, ext, j)


def least_model(p: Program, j: PreInterpretation) -> frozenset[GroundAtom]:
    """Least fixpoint of the immediate-consequence operator over domain ``range(m)``."""
    if p.mode == EQUATIONAL:
        return _equational_model(p, j)
    m = j.m
    model: set[GroundAtom] = set()
    changed = True
    while changed:
        changed = False
        for c in p.clauses:
            for atom in list(_consequences(c, model, j, m)):
                if atom not in model:
                    model.add(atom)
                    changed = True
    return frozenset(model)


def _equational_model(p: Program, j: PreInterpretation) -> frozenset[GroundAtom]:
    """``eq`` is the identity; ``p`` holds iff some fact is violated or some denial met."""
    m = j.m
    model: set[GroundAtom] = {("eq", (d, d)) for d in range(m)}
    for e in p.equations:
        vs = variables(e)
        for vals in itertools.product(range(m), repeat=len(vs)):
            env = dict(zip(vs, vals))
            same = eval_term(e.lhs, env, j) == eval_term(e.rhs, env, j)
            if same != e.positive:
                model.add((p.query, ()))
                return frozenset(model)
    return frozenset(model)


def query_true(p: Program, j: PreInterpretation) -> bool:
    return (p.query, ()) in least_model(p, j)


@dataclass(frozen=True)
class OracleReport:
    total: int
    failing: int
    example: PreInterpretation | None = None

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "failing": self.failing,
            "example": self.example.as_dict() if self.example is not None else None,
        }


def exhaustive_verdict(p: Program, m: int, cap: int = DEFAULT_CAP) -> OracleReport:
    """Count the pre-interpretations of size ``m`` under which the query is false."""
    index = CellIndex(extract_signature(p), m)
    total = m ** len(index)
    if total > cap:
        raise EnumerationCapExceeded(f"{total} pre-interpretations exceed the cap of {cap}")
    failing = 0
    example = None
    for j in all_preinterpretations(index):
        if not query_true(p, j):
            failing += 1
            if example is None:
                example = j
    return OracleReport(total, failing, example)


def equality_axioms(sig: Signature) -> Program:
    """Reflexivity, symmetry, transitivity and one substitution axiom per functor."""
    X, Y, Z = Var("X"), Var("Y"), Var("Z")
    clauses = [
        Clause(Struct("eq", (X, X))),
        Clause(Struct("eq", (X, Y)), (Struct("eq", (Y, X)),)),
        Clause(Struct("eq", (X, Z)), (Struct("eq", (X, Y)), Struct("eq", (Y, Z)))),
    ]
    for f, n in sig.functions:
        xs = tuple(Var(f"X{i}") for i in range(1, n + 1))
        ys = tuple(Var(f"Y{i}") for i in range(1, n + 1))
        head = Struct("eq", (Struct(f, xs), Struct(f, ys)))
        clauses.append(Clause(head, tuple(Struct("eq", (a, b)) for a, b in zip(xs, ys))))
    return Program(tuple(clauses), "eq")
