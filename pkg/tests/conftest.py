import pytest

from failprove.corpus import NAMES, load_corpus
from failprove.preinterp import CellIndex
from failprove.syntax import extract_signature

EVENODD = """
even(zero).
even(s(X)) :- odd(X).
odd(s(X)) :- even(X).
even_odd :- even(X), odd(X).
?- even_odd.
"""


@pytest.fixture(scope="session")
def corpus():
    return {name: load_corpus(name) for name in NAMES}


@pytest.fixture(scope="session")
def evenodd(corpus):
    return corpus["evenodd"].program


@pytest.fixture(scope="session")
def evenodd_index(evenodd):
    return CellIndex(extract_signature(evenodd), 2)


# criterion number -> (passed, summary); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
CRITERIA = 10


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in range(1, CRITERIA + 1):
        if n not in ACCEPTANCE:
            tr.write_line(f"criterion {n:2d}: not run")
            continue
        ok, line = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {line}")
