"""Counter-based randomness keyed by (seed, tree vertex).

Every vertex of a Cayley tree gets a 64-bit key obtained by chaining a
splitmix64 finalizer along the path from the root.  Random choices at a
vertex are pure functions of its key, so a random object can be evaluated
lazily, to any radius, in any order, and always reproduces.

Scalar (Python int) and vectorised (numpy uint64) versions compute the same
numbers; the tests pin them against each other.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

MASK = (1 << 64) - 1
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_GOLDEN = 0x9E3779B97F4A7C15


def mix(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _C1) & MASK
    z = ((z ^ (z >> 27)) * _C2) & MASK
    return z ^ (z >> 31)


def root_key(seed: int, salt: int) -> int:
    return mix((seed & MASK) ^ mix(salt))


def child_key(key: int, code: int) -> int:
    return mix(key + _GOLDEN * (code + 1))


def sub_key(key: int, k: int) -> int:
    """Independent stream k derived from a vertex key."""
    return mix(key ^ ((_GOLDEN * (k + 7)) & MASK))


_U1 = np.uint64(_C1)
_U2 = np.uint64(_C2)
_UG = np.uint64(_GOLDEN)


def mix_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _U1
    z ^= z >> np.uint64(27)
    z *= _U2
    z ^= z >> np.uint64(31)
    return z


def root_key_array(seeds: np.ndarray, salt: int) -> np.ndarray:
    return mix_array(seeds.astype(np.uint64) ^ np.uint64(mix(salt)))


def child_key_array(keys: np.ndarray, code) -> np.ndarray:
    """``code`` may be an int or an array of per-entry letter codes."""
    if np.isscalar(code):
        step = np.uint64((_GOLDEN * (int(code) + 1)) & MASK)
    else:
        step = _UG * (np.asarray(code).astype(np.uint64) + np.uint64(1))
    return mix_array(keys + step)


def sub_key_array(keys: np.ndarray, k: int) -> np.ndarray:
    return mix_array(keys ^ np.uint64((_GOLDEN * (k + 7)) & MASK))


@lru_cache(maxsize=None)
def permutations_of(k: int) -> np.ndarray:
    """All permutations of range(k) in lexicographic order, one per row."""
    return np.asarray(list(itertools.permutations(range(k))), dtype=np.int64).reshape(-1, k)


def keyed_permutation(key: int, k: int) -> tuple[int, ...]:
    """Uniform permutation of range(k) (bias below k!/2**64)."""
    if k <= 8:
        table = permutations_of(k)
        return tuple(int(x) for x in table[key % len(table)])
    # Lehmer decoding for large alphabets, one fresh 64-bit draw per position
    pool = list(range(k))
    out = []
    for pos in range(k):
        j = sub_key(key, pos) % len(pool)
        out.append(pool.pop(j))
    return tuple(out)


def derive_seeds(seed: int, count: int) -> np.ndarray:
    """``count`` reproducible 64-bit per-sample seeds from one master seed."""
    return np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
