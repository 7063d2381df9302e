"""Search over pre-interpretations guided by conflict sets.

Each evaluation that succeeds yields a conflict set; the set is registered
with intelligent backtracking, which changes the value of the last cell of
the conflict in the current total order.  With the dynamic variant, cells
stay unordered until they take part in a conflict.  When every value of a
cell has been refuted, the union of the conflicts accumulated for it is a
secondary conflict (hyper-resolution) and backtracking continues from there.
An empty conflict means no pre-interpretation of this size can work.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .engine import ALL_ANSWERS, BETTER, FIRST, FIRST_ANSWER, Evaluator
from .preinterp import CellIndex, PreInterpretation, initial_value
from .syntax import Program, extract_signature
from .transform import ADVANCED, ELEMENTARY, InstrumentedProgram, compile_program, instrument

NAIVE = "naive"
SINGLE_CS = "single-cs"
BEST_CS = "best-cs"
STRATEGIES = (NAIVE, SINGLE_CS, BEST_CS)

SINGLE = "single"
BEST = "best"

FAILURE_PROVEN = "FailureProven"
EXHAUSTED = "Exhausted"
BUDGET_EXCEEDED = "BudgetExceeded"

DEFAULT_BUDGET = 10**6

# order of cells moved into the ordered set by one conflict
CANONICAL_ORDER = "canonical"
NAME_ORDER = "name"

# strategy -> (fa, policy, conflict choice, dynamic ordering)
PRESETS = {
    NAIVE: (ELEMENTARY, FIRST, SINGLE, False),
    SINGLE_CS: (ADVANCED, BETTER, SINGLE, True),
    BEST_CS: (ADVANCED, BETTER, BEST, True),
}


@dataclass(frozen=True)
class SearchConfig:
    """Search knobs; ``None`` fields take the strategy preset's value."""

    strategy: str = SINGLE_CS
    m: int = 2
    max_m: int | None = None
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    fa: str | None = None
    policy: str | None = None
    conflict: str | None = None
    dynamic: bool | None = None
    insertion: str = CANONICAL_ORDER

    def __post_init__(self):
        if self.strategy not in PRESETS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        fa, policy, conflict, dynamic = PRESETS[self.strategy]
        for name, default in (("fa", fa), ("policy", policy), ("conflict", conflict), ("dynamic", dynamic)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
        if self.m < 1:
            raise ValueError("domain size must be at least 1")
        if self.insertion not in INSERTIONS:
            raise ValueError(f"unknown insertion order {self.insertion!r}")

    @property
    def answer_mode(self) -> str:
        return ALL_ANSWERS if self.conflict == BEST else FIRST_ANSWER


@dataclass
class SearchStats:
    backtracks: int = 0
    evaluations: int = 0
    conflicts: int = 0
    secondary_conflicts: int = 0
    answers_total: int = 0
    seconds: float = 0.0


@dataclass
class SearchOutcome:
    verdict: str
    m: int
    stats: SearchStats
    model: PreInterpretation | None = None

    @property
    def proven(self) -> bool:
        return self.verdict == FAILURE_PROVEN


InsertionOrder = Callable[[list[int], "SearchState"], list[int]]


def canonical_insertion(cells: list[int], state: SearchState) -> list[int]:
    """Cell id order: constants first, so the target is a cell of the widest functor."""
    return sorted(cells)


def name_insertion(cells: list[int], state: SearchState) -> list[int]:
    """Functor name first, ignoring arity (kept for comparison runs)."""
    cell = state.index.cell
    return sorted(cells, key=lambda c: cell(c))


INSERTIONS = {CANONICAL_ORDER: canonical_insertion, NAME_ORDER: name_insertion}


class SearchState:
    """Ordered/unordered cell partition plus per-cell backtracking bookkeeping.

    Components are ``cell_id * m + value`` codes; conflict sets are sets of
    such codes.
    """

    def __init__(
        self,
        index: CellIndex,
        seed: int,
        dynamic: bool = True,
        insertion: InsertionOrder = canonical_insertion,
    ):
        self.index = index
        self.m = index.m
        self.dynamic = dynamic
        self.insertion = insertion
        self.values = [initial_value(seed, c, self.m) for c in index.cells]
        self.rng = random.Random(seed)
        self.ordered: list[int] = []
        self.pos: dict[int, int] = {}
        self.unordered: set[int] = set(range(len(index)))
        self.tried: dict[int, set[int]] = {}
        self.acc: dict[int, set[int]] = {}
        self.conflicts = 0
        self.secondary = 0
        self.secondary_log: list[frozenset[int]] = []
        if not dynamic:
            order = list(range(len(index)))
            random.Random(f"order/{seed}").shuffle(order)
            self._append(order)

    def preinterpretation(self) -> PreInterpretation:
        return PreInterpretation(self.index, tuple(self.values))

    def _append(self, cells: Sequence[int]) -> None:
        for c in cells:
            self.unordered.discard(c)
            self.pos[c] = len(self.ordered)
            self.ordered.append(c)
            self.tried[c] = set()
            self.acc[c] = set()

    def _release(self, c: int) -> None:
        """Forget everything learnt about ``c`` and give it a fresh value."""
        self.tried[c] = set()
        self.acc[c] = set()
        self.values[c] = self.rng.randrange(self.m)
        if self.dynamic:
            del self.pos[c]
            del self.tried[c]
            del self.acc[c]
            self.unordered.add(c)

    def register_conflict(self, cs: frozenset[int]) -> int | None:
        """Backtrack on conflict ``cs``; return the changed cell, or ``None`` when exhausted."""
        m = self.m
        self.conflicts += 1
        while True:
            if not cs:
                return None
            cells = {code // m for code in cs}
            if any(self.values[code // m] != code % m for code in cs):
                raise ValueError("conflict set does not hold in the current pre-interpretation")
            new = [c for c in cells if c in self.unordered]
            if new:
                if not self.dynamic:
                    raise ValueError("unordered cell in a fixed-order search")
                self._append(self.insertion(new, self))
            target = max(cells, key=self.pos.__getitem__)
            self.acc[target].update(code for code in cs if code // m != target)

            k = self.pos[target]
            for c in self.ordered[k + 1:]:
                self._release(c)
            if self.dynamic:
                del self.ordered[k + 1:]

            tried = self.tried[target]
            tried.add(self.values[target])
            for v in range(m):
                if v not in tried:
                    self.values[target] = v
                    return target

            cs = frozenset(self.acc[target])
            self.secondary += 1
            self.secondary_log.append(cs)
            self._release(target)
            if self.dynamic:
                self.ordered.pop()

    def check_invariants(self) -> None:
        m = self.m
        assert set(self.ordered).isdisjoint(self.unordered)
        assert len(self.ordered) + len(self.unordered) == len(self.index)
        for c in self.ordered:
            assert self.values[c] not in self.tried[c]
            assert len(self.tried[c]) < m
            assert all(code // m != c for code in self.acc[c])


def choose_conflict(answers: Sequence[frozenset[int]], state: SearchState, mode: str) -> frozenset[int]:
    if not answers:
        raise ValueError("no conflict sets to choose from")
    if mode == SINGLE:
        return answers[0]
    m = state.m
    unordered = state.unordered

    def key(cs: frozenset[int]):
        fresh = len({c // m for c in cs} & unordered)
        return fresh, len(cs), sorted(cs)

    return min(answers, key=key)


def search(
    ip: InstrumentedProgram,
    cfg: SearchConfig,
    insertion: InsertionOrder | None = None,
    evaluator: Evaluator | None = None,
) -> SearchOutcome:
    """Look for a pre-interpretation of size ``cfg.m`` under which the query fails."""
    if ip.fa != cfg.fa:
        raise ValueError(f"program instrumented for {ip.fa} analysis, config wants {cfg.fa}")
    start = time.perf_counter()
    index = CellIndex(ip.signature, cfg.m)
    ev = evaluator or Evaluator(ip, index)
    state = SearchState(index, cfg.seed, cfg.dynamic, insertion or INSERTIONS[cfg.insertion])
    stats = SearchStats()
    mode = cfg.answer_mode

    def finish(verdict: str, model: PreInterpretation | None = None) -> SearchOutcome:
        stats.conflicts = state.conflicts
        stats.secondary_conflicts = state.secondary
        stats.seconds = time.perf_counter() - start
        return SearchOutcome(verdict, cfg.m, stats, model)

    while True:
        j = state.preinterpretation()
        verdict = ev.evaluate(j, cfg.policy, mode)
        stats.evaluations += 1
        if verdict.fails:
            return finish(FAILURE_PROVEN, j)
        stats.backtracks += 1
        stats.answers_total += len(verdict.answers)
        if stats.backtracks >= cfg.budget:
            return finish(BUDGET_EXCEEDED)
        cs = choose_conflict(verdict.answers, state, cfg.conflict)
        if state.register_conflict(cs) is None:
            return finish(EXHAUSTED)


def advance_domain(outcome: SearchOutcome, cfg: SearchConfig) -> SearchConfig | None:
    """The next domain size to try after exhausting ``cfg.m``, or ``None`` to give up."""
    if outcome.verdict != EXHAUSTED:
        raise ValueError("only an exhausted search can move to a larger domain")
    if cfg.max_m is None or outcome.m >= cfg.max_m:
        return None
    return replace(cfg, m=outcome.m + 1)


@dataclass
class ProofRun:
    """All searches performed for one problem, smallest domain first."""

    outcomes: list[SearchOutcome] = field(default_factory=list)

    @property
    def final(self) -> SearchOutcome:
        return self.outcomes[-1]


def prove(program: Program, cfg: SearchConfig) -> ProofRun:
    """Search domain sizes ``cfg.m .. cfg.max_m`` until failure is proven."""
    ip = instrument(compile_program(program), cfg.fa)
    run = ProofRun()
    while True:
        outcome = search(ip, cfg)
        run.outcomes.append(outcome)
        if outcome.verdict != EXHAUSTED:
            return run
        nxt = advance_domain(outcome, cfg)
        if nxt is None:
            return run
        cfg = nxt


def outcome_record(name: str, cfg: SearchConfig, outcome: SearchOutcome, cells: int) -> dict:
    """JSON-ready stats record (no wall-clock fields, so records are reproducible)."""
    rec = {
        "problem": name,
        "strategy": cfg.strategy,
        "fa": cfg.fa,
        "policy": cfg.policy,
        "seed": cfg.seed,
        "m": outcome.m,
        "verdict": outcome.verdict,
        "backtracks": outcome.stats.backtracks,
        "secondary_conflicts": outcome.stats.secondary_conflicts,
        "answers_total": outcome.stats.answers_total,
        "cells": cells,
    }
    if outcome.model is not None:
        rec["model"] = outcome.model.as_dict()
    return rec


def cell_count(program: Program, m: int) -> int:
    return len(CellIndex(extract_signature(program), m))
