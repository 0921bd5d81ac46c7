"""Membership oracles: the plain DFA teacher and the four noisy devices.

Random devices never store answers.  The noise attached to a word is a keyed
pseudo-random function of (device seed, word), so a word keeps its answer
forever and two devices built with the same seed agree everywhere.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .automata import CounterFunction, Dfa
from .words import StatParams, WordBatch, WordDistribution, chernoff_sample_size, sample_chunks


def _seed64(seed: int) -> np.uint64:
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.uint64(seed)


def _check_probability(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    return float(p)


class MembershipOracle:
    """Answers ``word in L?``; subclasses implement :meth:`_answer_batch`.

    ``queries_made`` counts every word answered, batched or not.
    """

    kind = "oracle"

    def __init__(self, alphabet_size: int):
        self.alphabet_size = alphabet_size
        self._queries = 0

    @property
    def queries_made(self) -> int:
        return self._queries

    def query(self, word: Sequence[int]) -> bool:
        batch = WordBatch.single(word)
        self._check_letters(batch.letters)
        return bool(self.query_batch(batch, checked=True)[0])

    __call__ = query

    def query_batch(self, batch: WordBatch, checked: bool = False) -> np.ndarray:
        if not checked:
            self._check_letters(batch.letters)
        self._queries += len(batch)
        return self._answer_batch(batch.letters, batch.offsets)

    def _check_letters(self, letters: np.ndarray) -> None:
        if letters.size and (letters.min() < 0 or letters.max() >= self.alphabet_size):
            bad = letters[(letters < 0) | (letters >= self.alphabet_size)][0]
            raise ValueError(
                f"letter {int(bad)} out of range for alphabet of size {self.alphabet_size}"
            )

    def _answer_batch(self, letters: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DfaOracle(MembershipOracle):
    """Noise-free teacher for a DFA."""

    kind = "none"

    def __init__(self, dfa: Dfa):
        super().__init__(dfa.alphabet_size)
        self.base = dfa

    def _answer_batch(self, letters, offsets):
        return self.base.run_batch(letters, offsets)


class NoisyOutputDevice(MembershipOracle):
    """Flips the DFA's answer on each word independently with probability ``p``."""

    kind = "noisy_output"

    def __init__(self, base: Dfa, p: float, seed: int):
        super().__init__(base.alphabet_size)
        self.base = base
        self.p = _check_probability(p)
        self.seed = int(seed)
        self._key = _seed64(seed)

    def _answer_batch(self, letters, offsets):
        b = self.base
        return _kernels.run_noisy_output(
            b.delta, b.initial, b.final_mask, letters, offsets, self._key, self.p
        )


class NoisyInputDevice(MembershipOracle):
    """Replaces each letter with probability ``p`` by a different uniform letter, then asks the DFA."""

    kind = "noisy_input"

    def __init__(self, base: Dfa, p: float, seed: int):
        if base.alphabet_size < 2:
            raise ValueError("noisy input needs an alphabet with at least two letters")
        super().__init__(base.alphabet_size)
        self.base = base
        self.p = _check_probability(p)
        self.seed = int(seed)
        self._key = _seed64(seed)

    def perturb(self, batch: WordBatch) -> WordBatch:
        """The fixed mutated version of every word of the batch."""
        self._check_letters(batch.letters)
        return WordBatch(self._mutate(batch.letters, batch.offsets), batch.offsets)

    def _mutate(self, letters, offsets):
        return _kernels.mutate_letters(letters, offsets, self._key, self.p, self.alphabet_size)

    def _answer_batch(self, letters, offsets):
        return self.base.run_batch(self._mutate(letters, offsets), offsets)


class CounterDevice(MembershipOracle):
    """Accepts ``L(base)`` plus every word whose counter value is non-positive."""

    kind = "counter"

    def __init__(self, base: Dfa, counter: CounterFunction):
        if counter.alphabet_size != base.alphabet_size:
            raise ValueError("counter function and DFA have different alphabets")
        super().__init__(base.alphabet_size)
        self.base = base
        self.counter = counter
        self._weights = np.array(counter.per_letter, dtype=np.int64)

    def _answer_batch(self, letters, offsets):
        values = _kernels.counter_values(
            self.counter.value_of_empty, self._weights, letters, offsets
        )
        return self.base.run_batch(letters, offsets) | (values <= 0)


class PathologicalDevice(MembershipOracle):
    """``L(base)`` plus a persistent fair coin on every rejected word starting with ``w_a``."""

    kind = "pathological"

    def __init__(self, base: Dfa, w_a: Sequence[int], seed: int):
        super().__init__(base.alphabet_size)
        self.base = base
        self.w_a = tuple(int(a) for a in w_a)
        self._check_letters(np.array(self.w_a, dtype=np.int64))
        self.seed = int(seed)
        self._key = _seed64(seed)
        self._prefix = np.array(self.w_a, dtype=np.int64)

    def _answer_batch(self, letters, offsets):
        inside = self.base.run_batch(letters, offsets)
        cone = _kernels.prefix_mask(self._prefix, letters, offsets)
        coins = _kernels.fair_coins(self._key, letters, offsets)
        return inside | (cone & coins)


def as_oracle(x) -> MembershipOracle:
    return DfaOracle(x) if isinstance(x, Dfa) else x


def disagreement_count(o1, o2, batch: WordBatch) -> int:
    o1, o2 = as_oracle(o1), as_oracle(o2)
    if o1 is o2:
        return 0
    return int(np.count_nonzero(o1.query_batch(batch) != o2.query_batch(batch)))


def statistical_distance(
    o1, o2, d: WordDistribution, s: StatParams, rng: np.random.Generator
) -> float:
    """Fraction of ``chernoff_sample_size(s)`` sampled words on which the oracles disagree.

    Both oracles see the same sampled words.  DFAs are accepted in place of
    oracles.
    """
    o1, o2 = as_oracle(o1), as_oracle(o2)
    if o1.alphabet_size != o2.alphabet_size or o1.alphabet_size != d.alphabet_size:
        raise ValueError("oracles and distribution must share one alphabet")
    n = chernoff_sample_size(s)
    if o1 is o2:
        return 0.0
    diff = sum(disagreement_count(o1, o2, batch) for batch in sample_chunks(d, rng, n))
    return diff / n


def statistical_measure(o, d: WordDistribution, s: StatParams, rng: np.random.Generator) -> float:
    """Fraction of sampled words accepted."""
    o = as_oracle(o)
    n = chernoff_sample_size(s)
    hits = sum(int(np.count_nonzero(o.query_batch(b))) for b in sample_chunks(d, rng, n))
    return hits / n
