import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failprove.corpus import FACTS
from failprove.engine import BETTER, SUBSUME, Evaluator
from failprove.oracle import exhaustive_verdict, query_true
from failprove.preinterp import CellIndex, random_completion
from failprove.search import (
    BEST,
    BEST_CS,
    BUDGET_EXCEEDED,
    EXHAUSTED,
    FAILURE_PROVEN,
    NAIVE,
    SINGLE,
    SINGLE_CS,
    STRATEGIES,
    SearchConfig,
    SearchOutcome,
    SearchState,
    SearchStats,
    advance_domain,
    choose_conflict,
    prove,
    search,
)
from failprove.syntax import extract_signature, parse_program
from failprove.transform import ADVANCED, ELEMENTARY, compile_program, instrument


def zero_state(index, dynamic=True):
    st_ = SearchState(index, seed=0, dynamic=dynamic)
    st_.values = [0] * len(index)
    return st_


def test_register_conflict_example(evenodd_index):
    state = zero_state(evenodd_index)
    zero, s0 = evenodd_index.id("zero"), evenodd_index.id("s", (0,))
    target = state.register_conflict(frozenset({zero * 2, s0 * 2}))
    assert target == s0
    assert state.ordered == [zero, s0]
    assert state.values[s0] == 1
    assert state.values[zero] == 0
    assert state.tried[zero] == set() and state.acc[zero] == set()
    assert state.tried[s0] == {0} and state.acc[s0] == {zero * 2}
    state.check_invariants()


def test_second_conflict_on_same_target_yields_secondary(evenodd_index):
    state = zero_state(evenodd_index)
    zero, s0 = evenodd_index.id("zero"), evenodd_index.id("s", (0,))
    state.register_conflict(frozenset({zero * 2, s0 * 2}))
    # s(0)=1 refuted without zero: secondary conflict {zero=0}, zero moves to 1
    target = state.register_conflict(frozenset({s0 * 2 + 1}))
    assert target == zero
    assert state.secondary_log == [frozenset({zero * 2})]
    assert state.values[zero] == 1
    assert state.ordered == [zero]
    state.check_invariants()


def test_empty_conflict_exhausts(evenodd_index):
    assert zero_state(evenodd_index).register_conflict(frozenset()) is None


def test_singleton_domain_exhausts(evenodd):
    index = CellIndex(extract_signature(evenodd), 1)
    state = SearchState(index, seed=0)
    assert state.register_conflict(frozenset({0, 1})) is None


def test_conflict_must_hold(evenodd_index):
    state = zero_state(evenodd_index)
    with pytest.raises(ValueError):
        state.register_conflict(frozenset({1}))


def test_fixed_order_orders_every_cell(evenodd_index):
    state = SearchState(evenodd_index, seed=0, dynamic=False)
    assert sorted(state.ordered) == [0, 1, 2]
    assert not state.unordered


def test_choose_conflict(evenodd_index):
    state = zero_state(evenodd_index)
    state.register_conflict(frozenset({0, 2}))  # orders zero, s(0); s(1) stays unordered
    c1, c2, c3 = 0, 3, 4
    only = frozenset({c1, c2})
    assert choose_conflict([only], state, SINGLE) == only
    assert choose_conflict([only], state, BEST) == only
    a, b = frozenset({c1, c3}), frozenset({c1, c2})
    assert choose_conflict([a, b], state, BEST) == b
    assert choose_conflict([a, b], state, SINGLE) == a
    with pytest.raises(ValueError):
        choose_conflict([], state, BEST)


def test_choose_conflict_tie_breaks(evenodd_index):
    state = zero_state(evenodd_index)
    small, big = frozenset({0}), frozenset({0, 2})
    assert choose_conflict([big, small], state, BEST) == small
    x, y = frozenset({2}), frozenset({0})
    assert choose_conflict([x, y], state, BEST) == y


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_evenodd_proves(evenodd, strategy):
    run = prove(evenodd, SearchConfig(strategy=strategy, m=2, seed=3))
    out = run.final
    assert out.verdict == FAILURE_PROVEN
    assert not query_true(evenodd, out.model)
    s = out.model.as_dict()
    # failing exactly when s swaps the two values, whatever zero is
    assert (s["s(0)"], s["s(1)"]) == (1, 0)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_multiset3o_exhausts(corpus, strategy):
    out = prove(corpus["multiset3o"].program, SearchConfig(strategy=strategy, m=2)).final
    assert out.verdict == EXHAUSTED
    assert out.stats.evaluations <= 128


def test_appendlast_moves_to_three(corpus):
    run = prove(corpus["appendlast"].program, SearchConfig(m=2, max_m=3, seed=1))
    assert [o.verdict for o in run.outcomes] == [EXHAUSTED, FAILURE_PROVEN]
    assert [o.m for o in run.outcomes] == [2, 3]


def test_advance_domain():
    cfg = SearchConfig(m=2, max_m=3)
    nxt = advance_domain(SearchOutcome(EXHAUSTED, 2, SearchStats()), cfg)
    assert nxt.m == 3
    assert advance_domain(SearchOutcome(EXHAUSTED, 3, SearchStats()), nxt) is None
    assert advance_domain(SearchOutcome(EXHAUSTED, 2, SearchStats()), SearchConfig(m=2)) is None
    with pytest.raises(ValueError):
        advance_domain(SearchOutcome(FAILURE_PROVEN, 2, SearchStats()), cfg)


def test_budget(corpus):
    out = prove(corpus["blockpair2o"].program, SearchConfig(m=2, budget=5)).final
    assert out.verdict == BUDGET_EXCEEDED
    assert out.stats.backtracks == 5


def test_presets():
    assert (SearchConfig(strategy=NAIVE).fa, SearchConfig(strategy=NAIVE).policy) == (ELEMENTARY, "first")
    assert SearchConfig(strategy=NAIVE).dynamic is False
    cfg = SearchConfig(strategy=BEST_CS)
    assert (cfg.fa, cfg.policy, cfg.conflict, cfg.dynamic) == (ADVANCED, BETTER, BEST, True)
    assert SearchConfig(strategy=SINGLE_CS, policy=SUBSUME).policy == SUBSUME
    with pytest.raises(ValueError):
        SearchConfig(strategy="lucky")
    with pytest.raises(ValueError):
        SearchConfig(insertion="alphabetical-ish")


def test_instrumentation_must_match(evenodd):
    ip = instrument(compile_program(evenodd), ELEMENTARY)
    with pytest.raises(ValueError):
        search(ip, SearchConfig(strategy=SINGLE_CS))


class _Recording(Evaluator):
    def __init__(self, *args):
        super().__init__(*args)
        self.verdicts = []

    def evaluate(self, j, policy=BETTER, mode="all-answers"):
        v = super().evaluate(j, policy, mode)
        self.verdicts.append(v)
        return v


SMALL = [
    name
    for name, f in FACTS.items()
    if name == "evenodd" or (f is not None and f.cells <= 12 and f.m == 2)
] + ["appendlast", "reverselast", "cl3", "tba"]


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("name", SMALL)
def test_search_agrees_with_oracle_at_two(corpus, name, strategy):
    p = corpus[name].program
    index = CellIndex(extract_signature(p), 2)
    assert len(index) <= 12
    report = exhaustive_verdict(p, 2)
    cfg = SearchConfig(strategy=strategy, m=2, seed=5)
    ev = _Recording(instrument(compile_program(p), cfg.fa), index)
    out = search(ev.ip, cfg, evaluator=ev)
    assert (out.verdict == FAILURE_PROVEN) == (report.failing > 0)
    assert out.verdict in (FAILURE_PROVEN, EXHAUSTED)
    assert out.stats.backtracks == sum(v.succeeds for v in ev.verdicts)
    if out.model is not None:
        assert not query_true(p, out.model)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["multiset1o", "multiset2o", "multiset3o", "appendlast", "reverselast", "evenodd"]),
       st.sampled_from(STRATEGIES), st.integers(0, 10**6))
def test_secondary_conflicts_are_sound(corpus, name, strategy, seed):
    p = corpus[name].program
    m = 2
    index = CellIndex(extract_signature(p), m)
    cfg = SearchConfig(strategy=strategy, m=m, seed=seed)
    ip = instrument(compile_program(p), cfg.fa)
    ev = Evaluator(ip, index)
    state = SearchState(index, seed, cfg.dynamic)
    rng = random.Random(seed)
    while True:
        j = state.preinterpretation()
        v = ev.evaluate(j, cfg.policy, cfg.answer_mode)
        if v.fails:
            break
        if state.register_conflict(choose_conflict(v.answers, state, cfg.conflict)) is None:
            break
        state.check_invariants()
    for cs in state.secondary_log:
        for _ in range(20):
            assert query_true(p, random_completion(index, cs, rng))


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_determinism(corpus, strategy):
    p = corpus["multiset2o"].program
    cfg = SearchConfig(strategy=strategy, m=2, seed=11)
    a, b = prove(p, cfg).final, prove(p, cfg).final
    assert (a.verdict, a.stats.backtracks, a.model.values) == (b.verdict, b.stats.backtracks, b.model.values)


def test_insertion_hook(corpus):
    p = corpus["multiset2o"].program
    cfg = SearchConfig(m=2, seed=2)
    ip = instrument(compile_program(p), cfg.fa)
    seen = []

    def reverse(cells, state):
        seen.append(list(cells))
        return sorted(cells, reverse=True)

    out = search(ip, cfg, insertion=reverse)
    assert seen
    assert out.verdict == FAILURE_PROVEN


def test_trivial_query_exhausts_immediately():
    p = parse_program("p. ?- p.")
    out = prove(p, SearchConfig(m=2)).final
    assert out.verdict == EXHAUSTED
    assert out.stats.backtracks == 1
