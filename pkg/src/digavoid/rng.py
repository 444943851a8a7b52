"""Seeded randomness.

Two flavours are used throughout:

* ``arc_uniforms`` is a counter-based hash (splitmix64) keyed by ``(seed, key)``,
  so the value drawn for an arc never depends on iteration order.
* ``stream`` returns a numpy ``Generator`` for a named sub-stream of a seed.
  Streams with different labels are independent; the same labels always give
  the same sequence.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def _mix_seed(seed: int, labels) -> int:
    words = [int(seed) & _MASK]
    words.extend(_label_word(x) for x in labels)
    acc = 0
    for w in words:
        acc = _splitmix_scalar((acc ^ w) & _MASK)
    return acc


def _splitmix_scalar(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def arc_uniforms(seed: int, keys, *labels) -> np.ndarray:
    """Uniform floats in [0, 1), one per integer key, keyed by ``(seed, labels, key)``."""
    base = np.uint64(_mix_seed(seed, labels))
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = splitmix64(keys ^ base)
        h = splitmix64(h + base)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def stream(seed: int, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_mix_seed(seed, labels)))


def derive_seed(seed: int, *labels) -> int:
    """A 63-bit integer seed for a named child computation."""
    return _mix_seed(seed, labels) >> 1
