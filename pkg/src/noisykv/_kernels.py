"""Compiled inner loops shared by the scalar and batched query paths.

Words travel in "flat" form: one int64 array of letters plus an int64
offsets array of length ``n_words + 1``; word ``i`` is
``letters[offsets[i]:offsets[i + 1]]``.  A single word is a batch of one,
so the scalar and batched paths cannot disagree.

All hashing is done on uint64 with wrap-around arithmetic.  Numba promotes
mixed int64/uint64 expressions to float64, so every constant is cast.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

SALT_OUTPUT = np.uint64(0x6F75747075745F31)
SALT_INPUT = np.uint64(0x696E7075745F5F32)
SALT_LETTER = np.uint64(0x6C65747465725F33)
SALT_PATH = np.uint64(0x7061746873696E34)


@njit(cache=True, inline="always")
def mix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def unit(x):
    return np.float64(x >> _S11) * _INV53


@njit(cache=True)
def word_keys(seed, letters, offsets):
    """One 64-bit key per word; depends on the seed, the letters and the length."""
    n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = mix64(seed)
        for j in range(offsets[i], offsets[i + 1]):
            h = mix64(h ^ (np.uint64(letters[j]) + _ONE))
        out[i] = mix64(h ^ np.uint64(offsets[i + 1] - offsets[i]))
    return out


@njit(cache=True)
def run_batch(delta, initial, final_mask, letters, offsets):
    n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        q = initial
        for j in range(offsets[i], offsets[i + 1]):
            q = delta[q, letters[j]]
        out[i] = final_mask[q]
    return out


@njit(cache=True)
def run_noisy_output(delta, initial, final_mask, letters, offsets, seed, p):
    keys = word_keys(seed, letters, offsets)
    out = run_batch(delta, initial, final_mask, letters, offsets)
    for i in range(out.shape[0]):
        if unit(mix64(keys[i] ^ SALT_OUTPUT)) < p:
            out[i] = not out[i]
    return out


@njit(cache=True)
def mutate_letters(letters, offsets, seed, p, alphabet_size):
    """Replace each letter with probability p by a uniformly chosen other letter.

    The draw for position ``j`` of a word is keyed by (seed, word, j).
    """
    keys = word_keys(seed, letters, offsets)
    out = letters.copy()
    others = alphabet_size - 1
    for i in range(offsets.shape[0] - 1):
        start = offsets[i]
        for j in range(start, offsets[i + 1]):
            r = mix64(keys[i] ^ mix64(np.uint64(j - start) ^ SALT_INPUT))
            if unit(r) < p:
                shift = 1 + np.int64(unit(mix64(r ^ SALT_LETTER)) * others)
                if shift > others:
                    shift = others
                out[j] = (letters[j] + shift) % alphabet_size
    return out


@njit(cache=True)
def counter_values(c_lambda, per_letter, letters, offsets):
    n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        total = c_lambda
        for j in range(offsets[i], offsets[i + 1]):
            total += per_letter[letters[j]]
        out[i] = total
    return out


@njit(cache=True)
def prefix_mask(prefix, letters, offsets):
    n = offsets.shape[0] - 1
    m = prefix.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        start = offsets[i]
        if offsets[i + 1] - start < m:
            continue
        ok = True
        for j in range(m):
            if letters[start + j] != prefix[j]:
                ok = False
                break
        out[i] = ok
    return out


@njit(cache=True)
def fair_coins(seed, letters, offsets):
    keys = word_keys(seed, letters, offsets)
    out = np.empty(keys.shape[0], dtype=np.bool_)
    for i in range(keys.shape[0]):
        out[i] = (mix64(keys[i] ^ SALT_PATH) >> np.uint64(63)) == _ONE
    return out
