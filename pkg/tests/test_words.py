import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisykv.words import (
    DESK_STAT,
    PAPER_STAT,
    StatParams,
    WordBatch,
    WordDistribution,
    chernoff_sample_size,
    cone_probability,
    derive_seed,
    dump_words,
    rng_for,
    sample_batch,
    sample_chunks,
    sample_word,
    word_probability,
)

from .conftest import words_up_to


def mp_chernoff(alpha, gamma):
    mpmath.mp.dps = 50
    return int(mpmath.ceil(mpmath.log(2 / mpmath.mpf(gamma)) / (2 * mpmath.mpf(alpha) ** 2)))


def test_empty_word_probability_is_mu():
    assert word_probability(WordDistribution(0.01, 7), ()) == 0.01


def test_word_probability_formula():
    d = WordDistribution(0.2, 4)
    assert word_probability(d, (0, 3, 1)) == pytest.approx(0.2 * 0.2**3, rel=1e-14)


def test_probabilities_up_to_length_three_sum():
    d = WordDistribution(0.5, 2)
    total = sum(word_probability(d, w) for w in words_up_to(2, 3))
    assert total == pytest.approx(0.9375, abs=1e-15)


@given(st.floats(0.01, 0.99), st.integers(1, 4), st.integers(0, 5))
def test_truncated_mass_is_geometric(mu, k, length):
    d = WordDistribution(mu, k)
    total = sum(word_probability(d, w) for w in words_up_to(k, length))
    assert total == pytest.approx(1 - (1 - mu) ** (length + 1), rel=1e-9)


def test_cone_probability():
    d = WordDistribution(0.01, 5)
    assert cone_probability(d, (0, 0, 0)) == pytest.approx((0.99 / 5) ** 3, rel=1e-14)
    assert cone_probability(d, ()) == 1.0


def test_out_of_range_letters_rejected():
    d = WordDistribution(0.1, 2)
    with pytest.raises(ValueError):
        word_probability(d, (2,))
    with pytest.raises(ValueError):
        WordDistribution(0.0, 2)
    with pytest.raises(ValueError):
        WordDistribution(0.5, 0)


def test_chernoff_sizes():
    assert chernoff_sample_size(PAPER_STAT) == 15_201_805
    assert chernoff_sample_size(DESK_STAT) == 105_967
    assert chernoff_sample_size(PAPER_STAT) == mp_chernoff(5e-4, 1e-3)
    assert chernoff_sample_size(DESK_STAT) == mp_chernoff(5e-3, 1e-2)


@given(st.floats(1e-3, 0.5), st.floats(1e-4, 0.5))
def test_chernoff_matches_high_precision(alpha, gamma):
    n = chernoff_sample_size(StatParams(alpha, gamma))
    exact = mpmath.log(2 / mpmath.mpf(gamma)) / (2 * mpmath.mpf(alpha) ** 2)
    if abs(exact - mpmath.nint(exact)) > 1e-6:
        assert n == mp_chernoff(alpha, gamma)


def test_stat_params_validation():
    with pytest.raises(ValueError):
        StatParams(0.0, 0.1)
    with pytest.raises(ValueError):
        StatParams(0.1, 1.0)


def test_sampled_lengths_have_the_right_mean():
    d = WordDistribution(0.01, 3)
    batch = sample_batch(d, np.random.default_rng(1), 200_000)
    assert abs(batch.lengths().mean() - 99) < 1
    assert abs(np.mean(batch.lengths() == 0) - 0.01) < 0.002


def test_scalar_sampler_matches_distribution():
    d = WordDistribution(0.2, 2)
    rng = np.random.default_rng(2)
    words = [sample_word(d, rng) for _ in range(20_000)]
    lengths = np.array([len(w) for w in words])
    assert abs(lengths.mean() - 4.0) < 0.15
    assert abs(np.mean(lengths == 0) - 0.2) < 0.015
    ones = sum(sum(w) for w in words) / lengths.sum()
    assert abs(ones - 0.5) < 0.01


def test_batch_letters_are_uniform():
    d = WordDistribution(0.01, 5)
    batch = sample_batch(d, np.random.default_rng(3), 10_000)
    freq = np.bincount(batch.letters, minlength=5) / batch.letters.size
    assert np.all(np.abs(freq - 0.2) < 0.005)


def test_sample_chunks_total():
    d = WordDistribution(0.3, 2)
    sizes = [len(b) for b in sample_chunks(d, np.random.default_rng(0), 1000, chunk=300)]
    assert sizes == [300, 300, 300, 100]


@given(st.lists(st.lists(st.integers(0, 9), max_size=6), max_size=8))
def test_word_batch_roundtrip(words):
    words = [tuple(w) for w in words]
    batch = WordBatch.from_words(words)
    assert list(batch) == words
    assert len(batch) == len(words)
    assert batch.lengths().tolist() == [len(w) for w in words]


def test_single_word_batch():
    assert list(WordBatch.single((1, 2))) == [(1, 2)]
    assert list(WordBatch.single(())) == [()]


def test_derive_seed_is_deterministic_and_separates_keys():
    assert derive_seed(7, "device", 3) == derive_seed(7, "device", 3)
    seeds = {derive_seed(7, "device", j) for j in range(100)}
    assert len(seeds) == 100
    assert derive_seed(7, "device") != derive_seed(7, "counter")
    assert derive_seed(7, 1) != derive_seed(8, 1)
    assert 0 <= derive_seed(2**64 - 1, "x") < 2**64


def test_rng_for_is_reproducible():
    assert rng_for(5, "a").integers(1 << 60) == rng_for(5, "a").integers(1 << 60)


def test_dump_words():
    assert dump_words([(0, 1), (), (2,)]) == "0 1\n\n2\n"


def test_natural_log_in_chernoff():
    s = StatParams(0.1, 0.5)
    assert chernoff_sample_size(s) == math.ceil(math.log(4) / 0.02)
