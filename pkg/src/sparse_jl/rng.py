"""Counter-based 64-bit random numbers.

Every draw is a pure function of ``(key, counter)``: a SplitMix64 finaliser
applied to ``key + (counter + 1) * golden``. Keys split deterministically, so
a column (or a Monte-Carlo trial) can be regenerated on its own, in any
order, and in vectorised batches.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix64", "split_key", "CounterRNG"]

MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SPLIT = np.uint64(0xD1B54A32D192ED03)


def mix64(z):
    """SplitMix64 output function on a ``uint64`` array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def split_key(key, index):
    """Child key for ``index`` under ``key``; both broadcast as ``uint64`` arrays."""
    key = np.asarray(key, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(mix64(key ^ _SPLIT) + (index + np.uint64(1)) * _GOLDEN)


def _draw(key, counter):
    key = np.asarray(key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(key + (np.asarray(counter, dtype=np.uint64) + np.uint64(1)) * _GOLDEN)


class CounterRNG:
    """Stateless generator over a (possibly array-valued) key."""

    def __init__(self, seed):
        if isinstance(seed, (int, np.integer)):
            seed = np.uint64(int(seed) & MASK64)
        self.key = mix64(np.asarray(seed, dtype=np.uint64))

    @classmethod
    def _from_key(cls, key):
        obj = cls.__new__(cls)
        obj.key = np.asarray(key, dtype=np.uint64)
        return obj

    def split(self, index) -> "CounterRNG":
        return CounterRNG._from_key(split_key(self.key, index))

    def uint64(self, counter):
        return _draw(self.key, counter)

    def uniform(self, counter):
        """Doubles in ``[0, 1)`` with 53 random bits."""
        return (self.uint64(counter) >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def integers(self, bound, counter):
        """Integers in ``[0, bound)``; bias is below ``bound / 2**53``."""
        out = np.floor(self.uniform(counter) * bound).astype(np.int64)
        return np.minimum(out, np.asarray(bound, dtype=np.int64) - 1)

    def signs(self, counter):
        """+1 or -1 from the top bit of a draw."""
        top = (self.uint64(counter) >> np.uint64(63)).astype(np.int8)
        return (1 - 2 * top).astype(np.int8)
