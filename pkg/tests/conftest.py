import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from noisykv.automata import Dfa


@st.composite
def dfas(draw, max_states=6, max_letters=3, min_letters=1):
    n = draw(st.integers(1, max_states))
    k = draw(st.integers(min_letters, max_letters))
    delta = draw(st.lists(st.integers(0, n - 1), min_size=n * k, max_size=n * k))
    initial = draw(st.integers(0, n - 1))
    finals = draw(st.frozensets(st.integers(0, n - 1)))
    return Dfa(np.array(delta).reshape(n, k), initial, finals)


def words_up_to(k, length):
    for n in range(length + 1):
        yield from itertools.product(range(k), repeat=n)


def random_small_dfa(rng, max_states=6, max_letters=3, min_letters=1):
    n = int(rng.integers(1, max_states + 1))
    k = int(rng.integers(min_letters, max_letters + 1))
    finals = frozenset(int(q) for q in np.flatnonzero(rng.random(n) < 0.5))
    return Dfa(rng.integers(0, n, size=(n, k)), int(rng.integers(n)), finals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def add(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
