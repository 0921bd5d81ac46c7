"""Small hand-built automata used in examples, tests and the ELD discussion.

Letters: ``a = 0``, ``b = 1``, ``c = 2``.
"""

import numpy as np

from .automata import Dfa

A, B, C = 0, 1, 2


def a_until_b() -> Dfa:
    """LTL ``a U b`` over {a, b, c}; ``c`` stands for a valuation with neither a nor b.

    State 0 waits (loops on a), state 1 is the accepting sink, state 2 the
    rejecting sink.  Both sinks are bottom components reached by words of
    length one, so the automaton is equal-length-distinguishing.
    """
    return Dfa(np.array([[0, 1, 2], [1, 1, 1], [2, 2, 2]]), 0, frozenset({1}))


def odd_length(alphabet_size: int = 3) -> Dfa:
    """Words of odd length."""
    return Dfa(np.array([[1] * alphabet_size, [0] * alphabet_size]), 0, frozenset({1}))


def ends_with_a() -> Dfa:
    """``(a+b)*a`` over {a, b, c}; any ``c`` leads to a rejecting sink.

    States: 0 = q0, 1 = q_f, 2 = q_r.
    """
    return Dfa(np.array([[1, 0, 2], [1, 0, 2], [2, 2, 2]]), 0, frozenset({1}))


def cone_rejecting_example() -> Dfa:
    """Seven-state DFA over {a, b} rejecting every word that starts with ``aaa``.

    States 0..3 are q0, q1, q2 and the rejecting sink; 4, 5, 6 are q4, q5, q6.
    """
    delta = np.array(
        [
            [1, 4],  # q0
            [2, 4],  # q1
            [3, 5],  # q2
            [3, 3],  # sink
            [5, 5],  # q4
            [5, 6],  # q5
            [5, 6],  # q6
        ]
    )
    return Dfa(delta, 0, frozenset({4, 6}))
