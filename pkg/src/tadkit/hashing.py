"""Seeded 64-bit hashing used for feature buckets and seed derivation.

Everything downstream that needs randomness derives it from one root seed
via ``mix(seed, purpose_string)``, so a single integer reproduces a run.
The hash is FNV-1a over bytes followed by a splitmix64 finalizer, which
gives full avalanche behavior while staying trivially portable.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_M1 = 0xBF58476D1CE4E5B9
_SM_M2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """Plain FNV-1a over a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    """splitmix64 finalizer; avalanches a 64-bit value."""
    x = (x + _SM_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _SM_M1) & MASK64
    x = ((x ^ (x >> 27)) * _SM_M2) & MASK64
    return x ^ (x >> 31)


def hash64(data: bytes, seed: int = 0) -> int:
    """Seeded avalanche hash of a byte string."""
    return splitmix64(fnv1a64(data) ^ (seed & MASK64))


def mix(seed: int, label: str) -> int:
    """Derive a child seed from a parent seed and a purpose label."""
    return hash64(label.encode("utf-8"), seed)


def splitmix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over a uint64 array (wrapping arithmetic)."""
    x = (x + np.uint64(_SM_GAMMA)).astype(np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_SM_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_SM_M2)
    return x ^ (x >> np.uint64(31))
