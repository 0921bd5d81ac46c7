"""Kearns–Vazirani DFA learning behind noisy membership oracles."""

from .automata import (
    CounterFunction,
    Dfa,
    GenParams,
    canonical,
    complement,
    exact_equivalence,
    exact_measure,
    is_equal_length_distinguishing,
    is_isomorphic,
    minimize,
    plus_variant,
    product_status,
    random_counter_function,
    random_dfa,
    random_pathological_dfa,
    run,
)
from .devices import (
    CounterDevice,
    DfaOracle,
    MembershipOracle,
    NoisyInputDevice,
    NoisyOutputDevice,
    PathologicalDevice,
    statistical_distance,
)
from .learner import PacParams, learn_exact, learn_pac, learn_reduced
from .metrics import GainBand, information_gain, pathological_gain
from .words import StatParams, WordDistribution, chernoff_sample_size

__version__ = "0.1.0"
