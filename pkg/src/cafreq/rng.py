"""Deterministic, splittable randomness for reproducible experiments.

Everything here is built on the splitmix64 counter sequence: state steps by a
fixed odd constant and each output is a finalizer hash of the state.  Streams
are therefore pure functions of (seed, counter), which makes them cheap to
split per sample or per worker without any coordination.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
ALGORITHM_ID = "splitmix64-v1"

_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit bijective hash."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Derive an independent stream seed from a base seed and integer tags.

    Defined as iterated mixing: s <- mix64(mix64(s) ^ mix64(tag + 1)).
    """
    s = seed & MASK64
    for tag in tags:
        s = mix64(mix64(s) ^ mix64((tag + 1) & MASK64))
    return s


class SplitMix64:
    """splitmix64 stream; draw k is mix64(seed + k * GOLDEN)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    @classmethod
    def for_index(cls, seed: int, index: int) -> "SplitMix64":
        """Stream for one sample/worker index, independent per index."""
        return cls(derive_seed(seed, index))

    def next64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def bit(self) -> int:
        return self.next64() >> 63

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next64()
            if r < limit:
                return r % n

    def bernoulli(self, p: Fraction) -> bool:
        """Exact Bernoulli(p) event for rational p; p in {0, 1} draws nothing."""
        if p <= 0:
            return False
        if p >= 1:
            return True
        return self.below(p.denominator) < p.numerator


def bernoulli_word(rng: SplitMix64, length: int, p: Fraction) -> str:
    """Binary word of i.i.d. cells with 1-density p, vectorized.

    Cell i is 1 iff draw i of the stream is below floor(p * 2^64); the
    deviation from exact p is at most 2^-64 per cell.  Advances the stream
    by exactly `length` draws, matching the scalar next64 sequence.
    """
    if length == 0:
        return ""
    if p <= 0 or p >= 1:
        rng.state = (rng.state + length * GOLDEN) & MASK64
        return ("1" if p >= 1 else "0") * length
    threshold = (p.numerator << 64) // p.denominator
    base = np.uint64(rng.state)
    idx = np.arange(1, length + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = base + idx * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
        z = z ^ (z >> np.uint64(31))
    rng.state = (rng.state + length * GOLDEN) & MASK64
    bits = np.where(z < np.uint64(threshold), ord("1"), ord("0"))
    return bits.astype(np.uint8).tobytes().decode("ascii")
