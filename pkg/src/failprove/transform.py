"""Function elimination and conflict-set instrumentation.

``flatten`` compiles every compound term into calls to the cell relations
``cell_f(d1, ..., dn, v)`` so that program predicates are only ever called
with distinct free variables.  ``equationalize`` reduces an equational
problem to a single zero-arity predicate ``p`` that fails exactly when every
fact holds and every denial is violated.  ``instrument`` fixes how conflict
sets are collected while evaluating the flat program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .syntax import (
    EQUATIONAL,
    STANDARD,
    Atom,
    Clause,
    Program,
    ProgramError,
    Signature,
    Struct,
    Term,
    Var,
    extract_signature,
    variables,
)

ELEMENTARY = "elementary"
ADVANCED = "advanced"
FA_MODES = (ELEMENTARY, ADVANCED)

EQ_QUERY = "p"


@dataclass(frozen=True)
class PredCall:
    pred: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(self.args)})" if self.args else self.pred


@dataclass(frozen=True)
class CellCall:
    functor: str
    args: tuple[str, ...]
    result: str

    def __str__(self) -> str:
        return f"cell_{self.functor}({', '.join((*self.args, self.result))})"


@dataclass(frozen=True)
class VarEq:
    x: str
    y: str

    def __str__(self) -> str:
        return f"{self.x} = {self.y}"


@dataclass(frozen=True)
class VarDiseq:
    x: str
    y: str

    def __str__(self) -> str:
        return f"{self.x} != {self.y}"


@dataclass(frozen=True)
class Ground:
    var: str

    def __str__(self) -> str:
        return f"dom({self.var})"


FlatLiteral = Union[PredCall, CellCall, VarEq, VarDiseq, Ground]


@dataclass(frozen=True)
class FlatClause:
    pred: str
    head: tuple[str, ...]
    body: tuple[FlatLiteral, ...]

    def __str__(self) -> str:
        head = f"{self.pred}({', '.join(self.head)})" if self.head else self.pred
        if not self.body:
            return f"{head}."
        return f"{head} :- {', '.join(str(l) for l in self.body)}."


@dataclass(frozen=True)
class FlatProgram:
    clauses: tuple[FlatClause, ...]
    query: str
    signature: Signature
    mode: str = STANDARD

    def predicates(self) -> dict[str, int]:
        preds: dict[str, int] = {}
        for c in self.clauses:
            preds.setdefault(c.pred, len(c.head))
        return preds

    def dump(self) -> str:
        return "\n".join(str(c) for c in self.clauses) + f"\n?- {self.query}.\n"


class _Fresh:
    """Deterministic per-clause fresh variable names."""

    def __init__(self, taken: list[str]):
        self.taken = set(taken)
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"_V{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _compile_term(t: Struct, target: str, fresh: _Fresh, out: list[FlatLiteral]) -> None:
    """Emit cell calls computing ``t`` into ``target``, innermost terms first."""
    args = []
    for a in t.args:
        if isinstance(a, Var):
            args.append(a.name)
        else:
            v = fresh()
            _compile_term(a, v, fresh, out)
            args.append(v)
    out.append(CellCall(t.functor, tuple(args), target))


def _term_var(t: Term, fresh: _Fresh, out: list[FlatLiteral]) -> str:
    if isinstance(t, Var):
        return t.name
    v = fresh()
    _compile_term(t, v, fresh, out)
    return v


def _ground_fixup(head: tuple[str, ...], lits: list[FlatLiteral]) -> tuple[FlatLiteral, ...]:
    """Insert ``Ground`` literals wherever a variable must be a domain value.

    Binding is static in flat code, so it is known at compile time whether an
    equality meets two free variables, a disequality meets a free variable,
    or a head variable is never bound by the body.
    """
    bound: set[str] = set()
    out: list[FlatLiteral] = []
    for lit in lits:
        if isinstance(lit, PredCall):
            bound.update(lit.args)
        elif isinstance(lit, CellCall):
            bound.update(lit.args)
            bound.add(lit.result)
        elif isinstance(lit, VarEq):
            if lit.x not in bound and lit.y not in bound:
                out.append(Ground(lit.y))
            bound.update((lit.x, lit.y))
        elif isinstance(lit, VarDiseq):
            for v in (lit.x, lit.y):
                if v not in bound:
                    out.append(Ground(v))
                    bound.add(v)
        elif isinstance(lit, Ground):
            if lit.var in bound:
                continue
            bound.add(lit.var)
        out.append(lit)
    for v in head:
        if v not in bound:
            out.append(Ground(v))
            bound.add(v)
    return tuple(out)


def flatten_clause(c: Clause) -> FlatClause:
    fresh = _Fresh(variables(c))
    out: list[FlatLiteral] = []
    bound: set[str] = set()
    for atom in c.body:
        call_args: list[str] = []
        eqs: list[FlatLiteral] = []
        terms: list[tuple[Struct, str]] = []
        for t in atom.args:
            if isinstance(t, Var):
                if t.name in bound or t.name in call_args:
                    v = fresh()
                    call_args.append(v)
                    eqs.append(VarEq(v, t.name))
                else:
                    call_args.append(t.name)
            else:
                v = fresh()
                call_args.append(v)
                terms.append((t, v))
        out.append(PredCall(atom.functor, tuple(call_args)))
        bound.update(call_args)
        out.extend(eqs)
        for t, v in terms:
            _compile_term(t, v, fresh, out)
            bound.update(variables(t))

    head: list[str] = []
    for t in c.head.args:
        if isinstance(t, Var) and t.name not in head:
            head.append(t.name)
        elif isinstance(t, Var):
            v = fresh()
            head.append(v)
            out.append(VarEq(v, t.name))
        else:
            v = fresh()
            head.append(v)
            _compile_term(t, v, fresh, out)
    return FlatClause(c.head.functor, tuple(head), _ground_fixup(tuple(head), out))


def flatten(p: Program) -> FlatProgram:
    if p.mode != STANDARD:
        raise ProgramError("flatten expects a standard program; use equationalize")
    clauses = tuple(flatten_clause(c) for c in p.clauses)
    return FlatProgram(clauses, p.query, extract_signature(p), STANDARD)


def equationalize(p: Program) -> FlatProgram:
    """Reduce facts and denials over the identity equality to the query ``p``.

    A fact ``t1 = t2`` yields ``p :- dom(X).., t1 -> A, t2 -> B, A != B`` and a
    denial ``s1 != s2`` yields ``p :- s1 -> A, s2 -> B, A = B``.
    """
    if p.mode != EQUATIONAL or p.clauses:
        raise ProgramError("mixed-mode program: equational problems contain only equations")
    clauses = []
    for e in p.equations:
        vs = variables(e)
        fresh = _Fresh(vs)
        out: list[FlatLiteral] = []
        if e.positive:
            out.extend(Ground(v) for v in vs)
        a = _term_var(e.lhs, fresh, out)
        b = _term_var(e.rhs, fresh, out)
        out.append(VarDiseq(a, b) if e.positive else VarEq(a, b))
        clauses.append(FlatClause(EQ_QUERY, (), _ground_fixup((), out)))
    return FlatProgram(tuple(clauses), EQ_QUERY, extract_signature(p), EQUATIONAL)


def compile_program(p: Program) -> FlatProgram:
    return equationalize(p) if p.mode == EQUATIONAL else flatten(p)


def check_ordering(fc: FlatClause) -> list[str]:
    """Violations of the flat-clause invariants (empty when well formed)."""
    problems = []
    bound: set[str] = set()
    for lit in fc.body:
        if isinstance(lit, PredCall):
            if len(set(lit.args)) != len(lit.args):
                problems.append(f"{lit}: repeated argument")
            if bound & set(lit.args):
                problems.append(f"{lit}: argument bound earlier")
            bound.update(lit.args)
        elif isinstance(lit, CellCall):
            bound.update(lit.args)
            bound.add(lit.result)
        elif isinstance(lit, VarEq):
            if lit.x not in bound and lit.y not in bound:
                problems.append(f"{lit}: both sides free")
            bound.update((lit.x, lit.y))
        elif isinstance(lit, VarDiseq):
            if lit.x not in bound or lit.y not in bound:
                problems.append(f"{lit}: free argument")
        elif isinstance(lit, Ground):
            if lit.var in bound:
                problems.append(f"{lit}: already bound")
            bound.add(lit.var)
    for v in fc.head:
        if v not in bound:
            problems.append(f"head variable {v} unbound")
    return problems


# --------------------------------------------------------------------------
# instrumentation


@dataclass(frozen=True)
class InstrumentedProgram:
    """A flat program together with its failure-analysis mode.

    Every clause implicitly gains a conflict-set output and ends with a
    ``check_return`` on its answer; the engine interprets both.
    """

    flat: FlatProgram
    fa: str

    @property
    def signature(self) -> Signature:
        return self.flat.signature

    @property
    def query(self) -> str:
        return self.flat.query

    def listing(self) -> str:
        return "\n".join(_instrumented_clause(c, self.fa) for c in self.flat.clauses) + "\n"


def instrument(fp: FlatProgram, fa: str = ADVANCED) -> InstrumentedProgram:
    if fa not in FA_MODES:
        raise ValueError(f"unknown failure analysis mode {fa!r}")
    return InstrumentedProgram(fp, fa)


def _instrumented_clause(c: FlatClause, fa: str) -> str:
    n = 0

    def cs() -> str:
        nonlocal n
        n += 1
        return f"CS{n}"

    cur = "[]"
    body = []
    bound: set[str] = set()
    tmp = 0
    for lit in c.body:
        if isinstance(lit, PredCall):
            sub = cs()
            body.append(f"{lit.pred}({', '.join((*lit.args, sub))})")
            bound.update(lit.args)
            if cur == "[]":
                cur = sub
            else:
                new = cs()
                body.append(f"merge({cur}, {sub}, {new})")
                cur = new
        elif isinstance(lit, CellCall):
            args = f"[{', '.join(lit.args)}]"
            bound.update(lit.args)
            if fa == ELEMENTARY:
                new = cs()
                body.append(f"lookup(cell_{lit.functor}, {args}, {lit.result}, {cur}, {new})")
                cur = new
            elif lit.result not in bound:
                # the component only becomes the provenance of the result
                body.append(f"comp(cell_{lit.functor}, {args}, {lit.result})")
            else:
                tmp += 1
                r, new = f"_R{tmp}", cs()
                body.append(f"comp(cell_{lit.functor}, {args}, {r})")
                body.append(f"unify({r}, {lit.result}, {cur}, {new})")
                cur = new
            bound.add(lit.result)
        elif isinstance(lit, VarEq):
            if fa == ELEMENTARY:
                body.append(f"{lit.x} = {lit.y}")
            else:
                new = cs()
                body.append(f"unify({lit.x}, {lit.y}, {cur}, {new})")
                cur = new
            bound.update((lit.x, lit.y))
        elif isinstance(lit, VarDiseq):
            if fa == ELEMENTARY:
                body.append(f"{lit.x} \\= {lit.y}")
            else:
                new = cs()
                body.append(f"disunify({lit.x}, {lit.y}, {cur}, {new})")
                cur = new
        elif isinstance(lit, Ground):
            body.append(f"dom({lit.var})")
            bound.add(lit.var)
    head = f"{c.pred}({', '.join((*c.head, cur))})"
    body.append(f"check_return({head})")
    return f"{head} :- {', '.join(body)}."
