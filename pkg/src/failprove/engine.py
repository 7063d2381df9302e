"""Tabled evaluation of an instrumented flat program under a fixed pre-interpretation.

Every program predicate is only called with distinct free variables, so one
table per predicate suffices.  Evaluation is driven by an agenda of
(consumer, answer) pairs: a consumer is a clause body suspended right after a
predicate call, and every accepted answer is delivered to every consumer of
its table exactly once.

Scheduling is local: the strongly connected components of the predicate call
graph are completed one at a time, callees first, so a caller only ever sees
the final (best) answers of the tables below it.

Conflict sets are ``frozenset`` of component codes (see ``preinterp``).  With
advanced failure analysis each bound variable carries the set of components
used to compute its value and only equalities that are actually tested add
to the clause conflict set; with elementary analysis every consulted
component goes straight into the clause conflict set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .preinterp import CellIndex, PreInterpretation
from .transform import (
    ADVANCED,
    CellCall,
    FlatClause,
    Ground,
    InstrumentedProgram,
    PredCall,
    VarDiseq,
    VarEq,
)

FIRST = "first"
BETTER = "better"
SUBSUME = "subsume"
POLICIES = (FIRST, BETTER, SUBSUME)

FIRST_ANSWER = "first-answer"
ALL_ANSWERS = "all-answers"

EMPTY: frozenset[int] = frozenset()

_PRED, _CELL, _EQ, _NEQ, _GROUND = range(5)


def merge(a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
    """Canonical union of two conflict sets."""
    if not a:
        return b
    if not b:
        return a
    return a | b


def monitored_unify(x, y, cs: frozenset[int]):
    """Unify two slots, each ``None`` (free) or a ``(value, provenance)`` pair.

    Returns ``(x', y', cs')`` or ``None`` on failure.  Binding a free slot
    leaves the clause conflict set unchanged; comparing two bound slots adds
    both provenances.
    """
    if x is None:
        return y, y, cs
    if y is None:
        return x, x, cs
    if x[0] != y[0]:
        return None
    return x, y, merge(merge(x[1], y[1]), cs)


def monitored_disunify(x, y, cs: frozenset[int]):
    if x is None or y is None:
        raise ValueError("disunify needs ground arguments")
    if x[0] == y[0]:
        return None
    return merge(merge(x[1], y[1]), cs)


class Answer:
    __slots__ = ("values", "provs", "cs", "alive")

    def __init__(self, values: tuple[int, ...], provs: tuple[frozenset[int], ...], cs: frozenset[int]):
        self.values = values
        self.provs = provs
        self.cs = cs
        self.alive = True

    def full(self) -> frozenset[int]:
        """Every component this answer depends on, head provenance included."""
        out = self.cs
        for p in self.provs:
            out = merge(out, p)
        return out

    def same(self, other: Answer) -> bool:
        return self.cs == other.cs and self.provs == other.provs

    def subsumes(self, other: Answer) -> bool:
        """True when ``other`` is redundant given ``self`` (pointwise subset)."""
        return self.cs <= other.cs and all(a <= b for a, b in zip(self.provs, other.provs))

    def __repr__(self) -> str:
        return f"Answer({self.values}, cs={sorted(self.cs)})"


ACCEPT = "accept"
REJECT = "reject"
REPLACE = "replace"


def check_return(bucket: list[Answer], cand: Answer, policy: str) -> tuple[str, list[Answer]]:
    """Decide what happens to a candidate answer with the same value tuple as ``bucket``.

    Returns the decision and the stored answers it displaces.
    """
    if not bucket:
        return ACCEPT, []
    if any(old.same(cand) for old in bucket):
        return REJECT, []
    if policy == FIRST:
        return REJECT, []
    if policy == BETTER:
        old = bucket[0]
        if len(cand.full()) < len(old.full()):
            return REPLACE, [old]
        return REJECT, []
    if policy == SUBSUME:
        if any(old.subsumes(cand) for old in bucket):
            return REJECT, []
        removed = [old for old in bucket if cand.subsumes(old)]
        return (REPLACE if removed else ACCEPT), removed
    raise ValueError(f"unknown check_return policy {policy!r}")


@dataclass
class Table:
    pred: str
    answers: dict[tuple[int, ...], list[Answer]] = field(default_factory=dict)
    consumers: list = field(default_factory=list)
    complete: bool = False

    def alive(self) -> list[Answer]:
        return [a for bucket in self.answers.values() for a in bucket]


@dataclass(frozen=True)
class Verdict:
    """Outcome of one evaluation: ``fails`` or a non-empty list of conflict sets."""

    answers: tuple[frozenset[int], ...]
    answers_found: int = 0
    derivations: int = 0

    @property
    def fails(self) -> bool:
        return not self.answers

    @property
    def succeeds(self) -> bool:
        return bool(self.answers)


class _Stop(Exception):
    pass


@dataclass
class _Compiled:
    pred: str
    nvars: int
    head: tuple[int, ...]
    ops: tuple


def _compile_clause(c: FlatClause, index: CellIndex) -> _Compiled:
    slots: dict[str, int] = {}

    def slot(v: str) -> int:
        return slots.setdefault(v, len(slots))

    ops = []
    for lit in c.body:
        if isinstance(lit, PredCall):
            ops.append((_PRED, lit.pred, tuple(slot(v) for v in lit.args)))
        elif isinstance(lit, CellCall):
            if lit.functor not in index.offset:
                raise KeyError(f"cell {lit.functor} not in signature")
            ops.append((_CELL, index.offset[lit.functor], tuple(slot(v) for v in lit.args), slot(lit.result)))
        elif isinstance(lit, VarEq):
            ops.append((_EQ, slot(lit.x), slot(lit.y)))
        elif isinstance(lit, VarDiseq):
            ops.append((_NEQ, slot(lit.x), slot(lit.y)))
        elif isinstance(lit, Ground):
            ops.append((_GROUND, slot(lit.var)))
    head = tuple(slot(v) for v in c.head)
    return _Compiled(c.pred, len(slots), head, tuple(ops))


def call_graph_sccs(clauses: dict[str, list[_Compiled]], root: str) -> list[list[str]]:
    """SCCs of the predicates reachable from ``root``, callees before callers."""
    graph = nx.DiGraph()
    graph.add_node(root)
    for p, ccs in clauses.items():
        graph.add_node(p)
        graph.add_edges_from((p, op[1]) for cc in ccs for op in cc.ops if op[0] == _PRED)
    reach = graph.subgraph(nx.descendants(graph, root) | {root})
    dag = nx.condensation(reach)
    members = {n: sorted(dag.nodes[n]["members"]) for n in dag}
    order = nx.lexicographical_topological_sort(dag, key=lambda n: members[n][0])
    return [members[n] for n in reversed(list(order))]


class Evaluator:
    """Evaluates one instrumented program under many pre-interpretations of one size."""

    def __init__(self, ip: InstrumentedProgram, index: CellIndex):
        if ip.signature.functions != index.signature.functions:
            raise ValueError("program and pre-interpretation signatures differ")
        self.ip = ip
        self.index = index
        self.advanced = ip.fa == ADVANCED
        self.clauses: dict[str, list[_Compiled]] = {}
        for c in ip.flat.clauses:
            self.clauses.setdefault(c.pred, []).append(_compile_clause(c, index))
        if ip.query not in self.clauses:
            self.clauses[ip.query] = []
        self.schedule = call_graph_sccs(self.clauses, ip.query)

    def evaluate(self, j: PreInterpretation, policy: str = BETTER, mode: str = ALL_ANSWERS) -> Verdict:
        run = _Run(self, j, policy, mode)
        return run.execute()

    def tables(self, j: PreInterpretation, policy: str = BETTER) -> dict[str, Table]:
        run = _Run(self, j, policy, ALL_ANSWERS)
        run.execute()
        return run.tables


class _Run:
    def __init__(self, ev: Evaluator, j: PreInterpretation, policy: str, mode: str):
        if j.index.signature.functions != ev.index.signature.functions or j.m != ev.index.m:
            raise ValueError("pre-interpretation does not match the evaluator")
        if policy not in POLICIES:
            raise ValueError(f"unknown check_return policy {policy!r}")
        if mode not in (FIRST_ANSWER, ALL_ANSWERS):
            raise ValueError(f"unknown answer mode {mode!r}")
        self.ev = ev
        self.values = j.values
        self.m = j.m
        self.policy = policy
        self.first_only = mode == FIRST_ANSWER
        self.advanced = ev.advanced
        self.tables: dict[str, Table] = {}
        self.agenda: list = []
        self.query_answers: list[frozenset[int]] = []
        self.derivations = 0

    def execute(self) -> Verdict:
        agenda = self.agenda
        try:
            for scc in self.ev.schedule:
                for pred in scc:
                    self._table(pred)
                while agenda:
                    task = agenda.pop()
                    if task[0] is None:
                        self._resume_start(task[1])
                    else:
                        self._resume(task[0], task[1])
                for pred in scc:
                    self.tables[pred].complete = True
        except _Stop:
            pass
        return Verdict(tuple(self.query_answers), len(self.query_answers), self.derivations)

    def _table(self, pred: str) -> Table:
        t = self.tables.get(pred)
        if t is None:
            t = self.tables[pred] = Table(pred)
            # reversed so that the first clause is popped first
            for cc in reversed(self.ev.clauses[pred]):
                self.agenda.append((None, cc))
        return t

    def _resume_start(self, cc: _Compiled) -> None:
        self._run(cc, 0, [None] * cc.nvars, EMPTY)

    def _resume(self, consumer, ans: Answer) -> None:
        if not ans.alive:
            return
        cc, i, env, cs, slots = consumer
        env = env[:]
        for s, v, p in zip(slots, ans.values, ans.provs):
            env[s] = (v, p)
        self._run(cc, i, env, merge(cs, ans.cs))

    def _run(self, cc: _Compiled, i: int, env: list, cs: frozenset[int]) -> None:
        ops = cc.ops
        n = len(ops)
        m = self.m
        advanced = self.advanced
        values = self.values
        while i < n:
            op = ops[i]
            kind = op[0]
            if kind == _CELL:
                _, off, args, res = op
                idx = 0
                prov = EMPTY
                for pos, s in enumerate(args):
                    a = env[s]
                    if a is None:
                        free = [args[k] for k in range(pos, len(args)) if env[args[k]] is None]
                        for combo in itertools.product(range(m), repeat=len(free)):
                            env2 = env[:]
                            for fs, d in zip(free, combo):
                                env2[fs] = (d, EMPTY)
                            self._run(cc, i, env2, cs)
                        return
                    idx = idx * m + a[0]
                    if advanced and a[1]:
                        prov = a[1] if not prov else prov | a[1]
                cid = off + idx
                val = values[cid]
                code = cid * m + val
                if advanced:
                    prov = prov | {code}
                elif code not in cs:
                    cs = cs | {code}
                r = env[res]
                if r is None:
                    env[res] = (val, prov)
                elif r[0] != val:
                    return
                elif advanced:
                    cs = merge(merge(r[1], prov), cs)
            elif kind == _PRED:
                _, pred, slots = op
                table = self._table(pred)
                consumer = (cc, i + 1, env, cs, slots)
                table.consumers.append(consumer)
                existing = [a for a in table.alive()]
                for a in reversed(existing):
                    self.agenda.append((consumer, a))
                return
            elif kind == _EQ:
                x, y = env[op[1]], env[op[2]]
                if x is None:
                    env[op[1]] = y
                elif y is None:
                    env[op[2]] = x
                elif x[0] != y[0]:
                    return
                elif advanced:
                    cs = merge(merge(x[1], y[1]), cs)
            elif kind == _NEQ:
                x, y = env[op[1]], env[op[2]]
                if x[0] == y[0]:
                    return
                if advanced:
                    cs = merge(merge(x[1], y[1]), cs)
            else:  # _GROUND
                s = op[1]
                for d in range(m):
                    env2 = env[:]
                    env2[s] = (d, EMPTY)
                    self._run(cc, i + 1, env2, cs)
                return
            i += 1
        self.derivations += 1
        head = cc.head
        self._add_answer(
            cc.pred,
            tuple(env[s][0] for s in head),
            tuple(env[s][1] for s in head),
            cs,
        )

    def _add_answer(self, pred: str, vals: tuple[int, ...], provs: tuple, cs: frozenset[int]) -> None:
        table = self.tables[pred]
        cand = Answer(vals, provs, cs)
        bucket = table.answers.get(vals)
        if bucket is None:
            table.answers[vals] = [cand]
        else:
            decision, removed = check_return(bucket, cand, self.policy)
            if decision == REJECT:
                return
            for old in removed:
                old.alive = False
            bucket[:] = [a for a in bucket if a.alive]
            bucket.append(cand)
        if pred == self.ev.ip.query:
            self.query_answers.append(cand.full())
            if self.first_only:
                raise _Stop
        for consumer in reversed(table.consumers):
            self.agenda.append((consumer, cand))


def evaluate(
    ip: InstrumentedProgram,
    j: PreInterpretation,
    policy: str = BETTER,
    mode: str = ALL_ANSWERS,
) -> Verdict:
    return Evaluator(ip, j.index).evaluate(j, policy, mode)


def comp(functor: str, args, j: PreInterpretation):
    """Interpret one cell call; free argument slots (``None``) are enumerated.

    Yields ``(value, provenance)`` pairs in ascending order of the free
    arguments.  Bound arguments are ``(value, provenance)`` pairs.
    """
    index = j.index
    m = j.m
    free = [k for k, a in enumerate(args) if a is None]
    for combo in itertools.product(range(m), repeat=len(free)):
        bound = list(args)
        for k, d in zip(free, combo):
            bound[k] = (d, EMPTY)
        cid = index.id(functor, [a[0] for a in bound])
        val = j.values[cid]
        prov = frozenset({cid * m + val})
        for a in bound:
            prov = merge(prov, a[1])
        yield val, prov


def format_tables(tables: dict[str, Table], index: CellIndex) -> str:
    """``pred(v1,...,vn) :: {component, ...}`` lines in canonical order."""
    lines = []
    for pred in sorted(tables):
        t = tables[pred]
        rows = []
        for vals, bucket in t.answers.items():
            for a in bucket:
                rows.append((vals, sorted(a.full()), a))
        for vals, key, a in sorted(rows, key=lambda r: (r[0], r[1])):
            atom = f"{pred}({','.join(map(str, vals))})" if vals else pred
            lines.append(f"{atom} :: {index.format_cs(a.full())}")
    return "\n".join(lines)
