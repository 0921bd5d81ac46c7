"""The geometric-length word distribution and sampling utilities.

A word is drawn by repeatedly stopping with probability ``mu`` and otherwise
appending a uniformly chosen letter, so ``Pr(w) = mu * ((1 - mu) / k) ** len(w)``.

Randomness comes from numpy ``Generator`` streams.  Child seeds are derived
with :func:`derive_seed`, which hashes a parent seed together with integer or
string keys through ``numpy.random.SeedSequence``; the same (seed, keys)
always yields the same child no matter which process computes it.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

Word = tuple[int, ...]


@dataclass(frozen=True)
class WordDistribution:
    mu: float = 0.01
    alphabet_size: int = 2

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie strictly between 0 and 1")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be positive")

    @property
    def letter_weight(self) -> float:
        return (1.0 - self.mu) / self.alphabet_size

    def _check(self, word: Sequence[int]) -> None:
        k = self.alphabet_size
        for a in word:
            if not 0 <= a < k:
                raise ValueError(f"letter {a} out of range for alphabet of size {k}")


@dataclass(frozen=True)
class StatParams:
    """Additive error ``alpha`` and failure probability ``gamma`` of a distance estimate."""

    alpha: float = 5e-3
    gamma: float = 1e-2

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie strictly between 0 and 1")


PAPER_STAT = StatParams(alpha=5e-4, gamma=1e-3)
DESK_STAT = StatParams(alpha=5e-3, gamma=1e-2)


def word_probability(d: WordDistribution, word: Sequence[int]) -> float:
    d._check(word)
    return d.mu * d.letter_weight ** len(word)


def cone_probability(d: WordDistribution, prefix: Sequence[int]) -> float:
    """Mass of all words starting with ``prefix``."""
    d._check(prefix)
    return d.letter_weight ** len(prefix)


def chernoff_sample_size(s: StatParams) -> int:
    """Hoeffding sample count ``ceil(ln(2/gamma) / (2 alpha^2))``."""
    return math.ceil(math.log(2.0 / s.gamma) / (2.0 * s.alpha**2))


def sample_word(d: WordDistribution, rng: np.random.Generator) -> Word:
    letters = []
    while rng.random() >= d.mu:
        letters.append(int(rng.integers(d.alphabet_size)))
    return tuple(letters)


@dataclass(frozen=True)
class WordBatch:
    """Words stored flat: word ``i`` is ``letters[offsets[i]:offsets[i + 1]]``."""

    letters: np.ndarray
    offsets: np.ndarray

    def __len__(self) -> int:
        return self.offsets.shape[0] - 1

    def word(self, i: int) -> Word:
        return tuple(int(a) for a in self.letters[self.offsets[i]:self.offsets[i + 1]])

    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    def __iter__(self) -> Iterator[Word]:
        return (self.word(i) for i in range(len(self)))

    @classmethod
    def from_words(cls, words: Sequence[Sequence[int]]) -> "WordBatch":
        lengths = np.fromiter((len(w) for w in words), dtype=np.int64, count=len(words))
        offsets = np.zeros(len(words) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        letters = np.fromiter(
            (a for w in words for a in w), dtype=np.int64, count=int(offsets[-1])
        )
        return cls(letters, offsets)

    @classmethod
    def single(cls, word: Sequence[int]) -> "WordBatch":
        return cls(np.array(word, dtype=np.int64).reshape(-1), np.array([0, len(word)], dtype=np.int64))


def sample_batch(d: WordDistribution, rng: np.random.Generator, n: int) -> WordBatch:
    """``n`` independent words from the distribution, as a flat batch."""
    lengths = rng.geometric(d.mu, size=n) - 1
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    letters = rng.integers(0, d.alphabet_size, size=int(offsets[-1]), dtype=np.int64)
    return WordBatch(letters, offsets)


def sample_chunks(d: WordDistribution, rng: np.random.Generator, total: int, chunk: int = 1 << 16):
    """Yield ``total`` sampled words as consecutive batches of at most ``chunk`` words."""
    done = 0
    while done < total:
        n = min(chunk, total - done)
        yield sample_batch(d, rng, n)
        done += n


def _key_int(key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode())
    key = int(key)
    if key < 0:
        raise ValueError("seed keys must be non-negative")
    return key


def derive_seed(seed: int, *keys) -> int:
    """64-bit child seed of ``seed`` for the given integer or string keys."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_int(k) for k in keys]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def rng_for(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys) if keys else seed)


def dump_words(words) -> str:
    """One word per line, letters separated by spaces (empty line for the empty word)."""
    return "".join(" ".join(str(a) for a in w) + "\n" for w in words)
