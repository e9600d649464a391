"""Seeded PRNG shared by every stochastic step.

splitmix64 expands a 64-bit seed into xoshiro256** state. Independent streams
come from :func:`child_seed`, which mixes a purpose tag and an index into the
parent seed, so a tree's randomness never depends on which worker built it.
All kernels are numba-compiled and operate on a ``uint64[4]`` state array.
"""
import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def tag_hash(purpose):
    """FNV-1a 64 of a purpose label, as a plain int."""
    h = 0xCBF29CE484222325
    for b in purpose.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & MASK64
    return h


@njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def splitmix64_next(state):
    """Advance a one-element splitmix64 state in place and return the output."""
    state[0] = state[0] + _GOLDEN
    return _mix(state[0])


@njit(cache=True, nogil=True)
def seed_state(seed):
    sm = np.empty(1, dtype=np.uint64)
    sm[0] = seed
    s = np.empty(4, dtype=np.uint64)
    for i in range(4):
        s[i] = splitmix64_next(sm)
    return s


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True, nogil=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True, nogil=True)
def below(s, n):
    """Uniform-ish integer in [0, n) via ``next_u64 mod n``."""
    return np.int64(next_u64(s) % np.uint64(n))


@njit(cache=True, nogil=True)
def child_seed(seed, tag, index):
    return np.uint64(seed) ^ _mix(np.uint64(tag) + np.uint64(index) * _GOLDEN)


@njit(cache=True, nogil=True)
def permutation(n, seed):
    """Fisher-Yates shuffle of ``0..n-1``."""
    s = seed_state(seed)
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = below(s, i + 1)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


@njit(cache=True, nogil=True)
def bootstrap_indices(n, seed):
    s = seed_state(seed)
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = below(s, n)
    return out


def derive(seed, purpose, index=0):
    """Python-side child seed: ``seed`` mixed with ``hash(purpose, index)``."""
    return int(child_seed(np.uint64(seed & MASK64), np.uint64(tag_hash(purpose)),
                          np.uint64(index)))


def stream(seed, count):
    """First ``count`` xoshiro256** outputs for ``seed`` (used in tests and debugging)."""
    s = seed_state(np.uint64(seed & MASK64))
    return [int(next_u64(s)) for _ in range(count)]
