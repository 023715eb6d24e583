"""SplitMix64 generator used for every seeded instance.

The state transition is pinned so instances are reproducible in any
language::

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64
    return z ^ (z >> 31)

Derived draws:

* ``uniform()``: ``(next >> 11) * 2^-53``.
* ``below(n)``: rejection sampling; draws ``r`` until
  ``r < 2^64 - (2^64 mod n)`` and returns ``r mod n``.
* ``sign_rows(n, d)``: each row consumes ``ceil(d / 64)`` words; coordinate
  ``j`` is bit ``j mod 64`` (LSB first) of word ``j // 64``; bit 1 means +1.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix(self.state)

    def block(self, count: int) -> np.ndarray:
        """The next ``count`` outputs as a uint64 array (same stream as next_u64)."""
        if count <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GOLDEN) & MASK64
        return z

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, count: int) -> np.ndarray:
        return (self.block(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def sample_distinct(self, n: int, count: int) -> list[int]:
        """``count`` distinct values of range(n) by a partial Fisher-Yates shuffle."""
        if count > n:
            raise ValueError("cannot draw more distinct values than the range holds")
        pool = list(range(n))
        for i in range(count):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]

    def sign_rows(self, n: int, d: int) -> np.ndarray:
        words = (d + 63) // 64
        raw = self.block(n * words).astype("<u8").reshape(n, words)
        bits = np.unpackbits(raw.view(np.uint8), axis=1, bitorder="little")[:, :d]
        return (bits.astype(np.int8) * 2 - 1).astype(np.int8)
