"""Abstract syntax, parser and printer for definite programs.

Input format::

    % comment
    even(zero).
    even(s(X)) :- odd(X).
    ?- even_odd.

Equational problems start with the ``#equational.`` directive and contain
facts ``t1 = t2.`` and denials ``t1 != t2.`` only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

STANDARD = "standard"
EQUATIONAL = "equational"

NIL = "nil"
CONS = "cons"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Struct:
    """A compound term, a constant (no args) or an atom (predicate + args)."""

    functor: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Struct]
Atom = Struct


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Atom, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{format_term(self.head)}."
        return f"{format_term(self.head)} :- {', '.join(format_term(a) for a in self.body)}."


@dataclass(frozen=True)
class Equation:
    """``lhs = rhs`` (a fact) or, with ``positive=False``, the denial ``lhs != rhs``."""

    lhs: Term
    rhs: Term
    positive: bool = True

    def __str__(self) -> str:
        op = "=" if self.positive else "!="
        return f"{format_term(self.lhs)} {op} {format_term(self.rhs)}."


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...]
    query: str
    mode: str = STANDARD
    equations: tuple[Equation, ...] = ()

    def predicates(self) -> dict[str, int]:
        preds: dict[str, int] = {}
        for c in self.clauses:
            preds.setdefault(c.head.functor, c.head.arity)
        return preds

    def clauses_for(self, pred: str) -> list[Clause]:
        return [c for c in self.clauses if c.head.functor == pred]


@dataclass(frozen=True)
class Signature:
    """Function symbols and predicates, each sorted by (name, arity)."""

    functions: tuple[tuple[str, int], ...]
    predicates: tuple[tuple[str, int], ...] = ()

    def arity(self, functor: str) -> int:
        for name, n in self.functions:
            if name == functor:
                return n
        raise KeyError(functor)


class ProgramError(Exception):
    """Raised for syntactically or structurally invalid programs."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class ParseError(ProgramError):
    pass


class ArityError(ProgramError):
    pass


class UndefinedPredicateError(ProgramError):
    pass


# --------------------------------------------------------------------------
# term utilities


def variables(t: Term | Clause | Equation, acc: list[str] | None = None) -> list[str]:
    """Distinct variable names in order of first occurrence."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, Struct):
        for a in t.args:
            variables(a, acc)
    elif isinstance(t, Clause):
        variables(t.head, acc)
        for a in t.body:
            variables(a, acc)
    elif isinstance(t, Equation):
        variables(t.lhs, acc)
        variables(t.rhs, acc)
    return acc


def subterms(t: Term) -> Iterator[Struct]:
    if isinstance(t, Struct):
        yield t
        for a in t.args:
            yield from subterms(a)


def _list_parts(t: Term) -> tuple[list[Term], Term] | None:
    items: list[Term] = []
    while isinstance(t, Struct) and t.functor == CONS and t.arity == 2:
        items.append(t.args[0])
        t = t.args[1]
    if not items:
        return None
    return items, t


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t.functor == NIL and not t.args:
        return "[]"
    parts = _list_parts(t)
    if parts is not None:
        items, tail = parts
        inner = ", ".join(format_term(x) for x in items)
        if isinstance(tail, Struct) and tail.functor == NIL and not tail.args:
            return f"[{inner}]"
        return f"[{inner}|{format_term(tail)}]"
    if not t.args:
        return t.functor
    return f"{t.functor}({', '.join(format_term(a) for a in t.args)})"


def format_program(p: Program) -> str:
    lines: list[str] = []
    if p.mode == EQUATIONAL:
        lines.append("#equational.")
        lines.extend(str(e) for e in p.equations)
        return "\n".join(lines) + "\n"
    lines.extend(str(c) for c in p.clauses)
    lines.append(f"?- {p.query}.")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<query>\?-)
  | (?P<neq>!=)
  | (?P<directive>\#[a-z_]+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*|[0-9]+)
  | (?P<punct>[(),.\[\]|=])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(_Tok(kind if kind != "punct" else chunk, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# --------------------------------------------------------------------------
# parser


@dataclass
class _Parser:
    toks: list[_Tok]
    pos: int = 0
    anon: int = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self, kind: str | None = None) -> _Tok:
        tok = self.toks[self.pos]
        if kind is not None and tok.kind != kind:
            want = {"eof": "end of input"}.get(kind, repr(kind))
            got = tok.text or "end of input"
            raise ParseError(f"expected {want}, found {got!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            if tok.text == "_":
                self.anon += 1
                return Var(f"_G{self.anon}")
            return Var(tok.text)
        if tok.kind == "name":
            self.take()
            if self.peek().kind == "(":
                self.take("(")
                args = [self.term()]
                while self.peek().kind == ",":
                    self.take()
                    args.append(self.term())
                self.take(")")
                return Struct(tok.text, tuple(args))
            return Struct(tok.text)
        if tok.kind == "[":
            return self.list_term()
        raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}", tok.line, tok.col)

    def list_term(self) -> Term:
        self.take("[")
        if self.peek().kind == "]":
            self.take()
            return Struct(NIL)
        items = [self.term()]
        while self.peek().kind == ",":
            self.take()
            items.append(self.term())
        tail: Term = Struct(NIL)
        if self.peek().kind == "|":
            self.take()
            tail = self.term()
        self.take("]")
        for x in reversed(items):
            tail = Struct(CONS, (x, tail))
        return tail

    def atom(self) -> Atom:
        tok = self.peek()
        t = self.term()
        if not isinstance(t, Struct) or (t.functor == NIL and tok.kind == "["):
            raise ParseError("expected an atom", tok.line, tok.col)
        return t

    def atom_list(self) -> list[Atom]:
        atoms = [self.atom()]
        while self.peek().kind == ",":
            self.take()
            atoms.append(self.atom())
        return atoms


def parse_program(text: str) -> Program:
    """Parse and validate a program text."""
    p = _Parser(_tokenize(text))
    clauses: list[Clause] = []
    equations: list[Equation] = []
    query_goals: list[Atom] | None = None
    query_pos: tuple[int, int] = (0, 0)
    mode = STANDARD
    while p.peek().kind != "eof":
        tok = p.peek()
        if tok.kind == "directive":
            p.take()
            if tok.text != "#equational":
                raise ParseError(f"unknown directive {tok.text}", tok.line, tok.col)
            if clauses or equations or query_goals is not None:
                raise ParseError("#equational must precede all clauses", tok.line, tok.col)
            p.take(".")
            mode = EQUATIONAL
            continue
        if tok.kind == "query":
            p.take()
            if query_goals is not None:
                raise ParseError("more than one query", tok.line, tok.col)
            query_goals = p.atom_list()
            query_pos = (tok.line, tok.col)
            p.take(".")
            continue
        if mode == EQUATIONAL:
            lhs = p.term()
            op = p.peek()
            if op.kind == "=":
                p.take()
                equations.append(Equation(lhs, p.term(), True))
            elif op.kind == "neq":
                p.take()
                equations.append(Equation(lhs, p.term(), False))
            else:
                raise ProgramError(
                    "ordinary clause in an equational program", tok.line, tok.col
                )
            p.take(".")
            continue
        head = p.atom()
        body: list[Atom] = []
        if p.peek().kind == "neck":
            p.take()
            body = p.atom_list()
        elif p.peek().kind in ("=", "neq"):
            t = p.peek()
            raise ParseError("equations are only allowed after #equational", t.line, t.col)
        p.take(".")
        clauses.append(Clause(head, tuple(body)))

    if mode == EQUATIONAL:
        if query_goals is not None:
            raise ProgramError("equational programs have an implicit query", *query_pos)
        prog = Program((), "p", EQUATIONAL, tuple(equations))
        _check_arities(prog)
        return prog

    if query_goals is None:
        last = p.toks[-1]
        raise ParseError("missing query directive '?- Goal.'", last.line, last.col)
    if len(query_goals) == 1 and not query_goals[0].args:
        query = query_goals[0].functor
    else:
        taken = {c.head.functor for c in clauses}
        query = "query"
        n = 0
        while query in taken:
            n += 1
            query = f"query_{n}"
        clauses.append(Clause(Struct(query), tuple(query_goals)))
    prog = Program(tuple(clauses), query, STANDARD)
    _check_arities(prog)
    _check_defined(prog, query_pos)
    return prog


def _check_arities(prog: Program) -> None:
    funcs: dict[str, int] = {}
    preds: dict[str, int] = {}

    def visit_term(t: Term) -> None:
        for s in subterms(t):
            if funcs.setdefault(s.functor, s.arity) != s.arity:
                raise ArityError(
                    f"function symbol {s.functor} used with arities {funcs[s.functor]} and {s.arity}"
                )

    for c in prog.clauses:
        for a in (c.head, *c.body):
            if preds.setdefault(a.functor, a.arity) != a.arity:
                raise ArityError(
                    f"predicate {a.functor} used with arities {preds[a.functor]} and {a.arity}"
                )
            for arg in a.args:
                visit_term(arg)
    for e in prog.equations:
        visit_term(e.lhs)
        visit_term(e.rhs)


def _check_defined(prog: Program, query_pos: tuple[int, int]) -> None:
    defined = {c.head.functor for c in prog.clauses}
    if prog.query not in defined:
        raise UndefinedPredicateError(f"query predicate {prog.query} is undefined", *query_pos)
    for c in prog.clauses:
        for a in c.body:
            if a.functor not in defined:
                raise UndefinedPredicateError(
                    f"predicate {a.functor}/{a.arity} called in {c.head.functor}/{c.head.arity} is undefined"
                )


def extract_signature(prog: Program) -> Signature:
    funcs: set[tuple[str, int]] = set()
    preds: set[tuple[str, int]] = set()
    terms: list[Term] = []
    for c in prog.clauses:
        for a in (c.head, *c.body):
            preds.add((a.functor, a.arity))
            terms.extend(a.args)
    for e in prog.equations:
        terms.extend((e.lhs, e.rhs))
    if prog.mode == EQUATIONAL:
        preds.add(("eq", 2))
    for t in terms:
        for s in subterms(t):
            funcs.add((s.functor, s.arity))
    return Signature(tuple(sorted(funcs)), tuple(sorted(preds)))
