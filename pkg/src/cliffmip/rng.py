"""Seeded, splittable 64-bit PRNG.

The generator is SplitMix64 (Steele, Lea & Flood, 2014). It is implemented
here with plain integer arithmetic so that a given seed yields the same
stream on every platform and every numpy/Python version. Every source of
randomness in the package (question sampling, Born-rule sampling, random
instance generation) draws from this class.

Splitting derives a child seed by mixing the parent's next output with a
fixed odd constant, so sibling streams are decorrelated and the parent
stream advances by exactly one step per split.
"""
from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_SPLIT_SALT = 0xD1B54A32D192ED03


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream.

    >>> SplitMix64(0).next_u64()
    16294208416658607535
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int = 0):
        self._state = int(seed) & _MASK

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def bit(self) -> int:
        return self.next_u64() >> 63

    def bits(self, width: int) -> str:
        return "".join(str(self.bit()) for _ in range(width))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            v = 0
            got = 0
            while got < k:
                v = (v << 64) | self.next_u64()
                got += 64
            v >>= got - k
            if v < n:
                return v

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def normal(self) -> float:
        """Standard normal via Box-Muller (one draw per call)."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def split(self) -> "SplitMix64":
        return SplitMix64(_mix(self.next_u64() ^ _SPLIT_SALT))

    def spawn(self, count: int) -> list["SplitMix64"]:
        return [self.split() for _ in range(count)]


def sample_index(weights, u: float) -> int:
    """Index drawn from an (approximately) normalised weight list given u in [0, 1).

    Zero-weight entries are never returned; floating-point slack at the top
    end falls back to the last positive entry.
    """
    total = 0.0
    last = -1
    for k, w in enumerate(weights):
        if w <= 0:
            continue
        last = k
        total += w
        if u < total:
            return k
    if last < 0:
        raise ValueError("cannot sample from an all-zero distribution")
    return last
