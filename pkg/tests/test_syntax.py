import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failprove.corpus import NAMES, load_corpus
from failprove.syntax import (
    EQUATIONAL,
    ArityError,
    Clause,
    ParseError,
    Program,
    ProgramError,
    Struct,
    UndefinedPredicateError,
    Var,
    extract_signature,
    format_program,
    parse_program,
)

from conftest import EVENODD


def test_evenodd_parses_to_four_clauses():
    p = parse_program(EVENODD)
    assert len(p.clauses) == 4
    assert p.query == "even_odd"
    assert p.clauses[0] == Clause(Struct("even", (Struct("zero"),)))
    assert p.clauses[3].body == (Struct("even", (Var("X"),)), Struct("odd", (Var("X"),)))


def test_single_fact():
    p = parse_program("p. ?- p.")
    assert p.clauses == (Clause(Struct("p")),)
    assert p.query == "p"


def test_undefined_predicate():
    with pytest.raises(UndefinedPredicateError):
        parse_program("p :- q, p. ?- p.")


def test_undefined_query():
    with pytest.raises(UndefinedPredicateError):
        parse_program("p. ?- r.")


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program("p.\nq :- p,\n  (.\n?- q.")
    assert info.value.line == 3
    assert info.value.column == 3
    assert "3:3" in str(info.value)


def test_missing_query():
    with pytest.raises(ParseError):
        parse_program("p.")


@pytest.mark.parametrize(
    "text",
    [
        "p(a). p(f(a)). p(f(a, b)). ?- p(a).",
        "p(a). q(a, b). q(a). ?- p(a).",
    ],
)
def test_arity_inconsistency(text):
    with pytest.raises(ArityError):
        parse_program(text)


def test_comments_and_lists():
    p = parse_program("% header\nl([a, b|T]) :- l(T). % tail\nl([]).\n?- l([a]).")
    head = p.clauses[0].head.args[0]
    assert head == Struct("cons", (Struct("a"), Struct("cons", (Struct("b"), Var("T")))))
    assert p.clauses[1].head.args[0] == Struct("nil")


def test_anonymous_variables_are_distinct():
    p = parse_program("p(_, _). ?- p(a, b).")
    a, b = p.clauses[0].head.args
    assert isinstance(a, Var) and isinstance(b, Var) and a != b


def test_compound_query_gets_wrapper():
    p = parse_program("p(a). query. ?- p(X), p(X).")
    assert p.query == "query_1"
    assert p.clauses[-1] == Clause(Struct("query_1"), (Struct("p", (Var("X"),)),) * 2)


def test_equational_program():
    p = parse_program("#equational.\nf(X) = X.\na != b.\n")
    assert p.mode == EQUATIONAL
    assert p.query == "p"
    assert [e.positive for e in p.equations] == [True, False]


def test_equational_rejects_clauses():
    with pytest.raises(ProgramError, match="ordinary clause"):
        parse_program("#equational.\nf(X) = X.\nq(a) :- q(b).\n")


def test_equation_outside_equational_mode():
    with pytest.raises(ParseError):
        parse_program("a = b. ?- p.")


def test_signature_evenodd():
    sig = extract_signature(parse_program(EVENODD))
    assert set(sig.functions) == {("zero", 0), ("s", 1)}
    assert set(sig.predicates) == {("even", 1), ("odd", 1), ("even_odd", 0)}
    assert list(sig.functions) == sorted(sig.functions)


def test_signature_appendlast(corpus):
    sig = extract_signature(corpus["appendlast"].program)
    assert set(sig.functions) == {("a", 0), ("b", 0), ("nil", 0), ("cons", 2)}


def test_signature_trivial():
    sig = extract_signature(parse_program("p. ?- p."))
    assert sig.functions == ()
    assert sig.predicates == (("p", 0),)


@pytest.mark.parametrize("name", NAMES)
def test_round_trip(corpus, name):
    p = corpus[name].program
    assert parse_program(format_program(p)) == p


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(NAMES), st.randoms(use_true_random=False))
def test_signature_invariant_under_clause_order(name, rnd: random.Random):
    p = load_corpus(name).program
    clauses = list(p.clauses)
    rnd.shuffle(clauses)
    q = Program(tuple(clauses), p.query, p.mode, p.equations)
    assert extract_signature(q) == extract_signature(p)
    assert parse_program(format_program(q)) == q


_terms = st.recursive(
    st.sampled_from([Var("X"), Var("Y"), Struct("a"), Struct("nil")]),
    lambda sub: st.builds(lambda xs: Struct("cons", tuple(xs)), st.lists(sub, min_size=2, max_size=2))
    | st.builds(lambda t: Struct("f", (t,)), sub),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(st.lists(_terms, min_size=1, max_size=3))
def test_format_parse_round_trip_on_generated_facts(args):
    head = Struct("p", tuple(args))
    p = Program((Clause(head), Clause(Struct("q"), (head,))), "q")
    assert parse_program(format_program(p)) == p
