"""Deterministic, portable random number generation.

Every stochastic step in this package draws from SplitMix64, a tiny
64-bit generator with a published reference implementation (Steele,
Lea & Flood 2014; it is the seeder behind Java's SplittableRandom).
For a 64-bit seed ``s`` the raw stream is

    state_0 = s
    state_n = (state_{n-1} + 0x9E3779B97F4A7C15) mod 2^64
    output_n = mix64(state_n)

with ``mix64`` the murmur-style finalizer below.  All derived draws
(floats, bounded ints, Poisson counts, shuffles) are defined on top of
the raw stream exactly as documented on each method, so a rewrite in
any language that follows this file reproduces our datasets bit for
bit.  Nothing here touches Python's global ``random`` state.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mix."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def sub_seed(seed: int, index: int) -> int:
    """Derive the sub-stream seed for item ``index`` of a run seeded by ``seed``.

    Defined as ``mix64(seed XOR (index + 1) * GOLDEN)``; the ``+ 1``
    keeps item 0 from sharing a stream with the parent seed.  Work
    split across items this way is order-independent.
    """
    return mix64((seed ^ (((index + 1) * _GOLDEN) & _MASK64)) & _MASK64)


class Rng:
    """A SplitMix64 stream.

    Instances are cheap, independent, and never shared across
    conceptually separate sampling tasks; derive one per task with
    :func:`sub_seed`.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1): the top 53 bits of one raw draw / 2^53."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive, by modulo reduction.

        Modulo bias is < 2^-50 for every range used here and is
        accepted in exchange for a branch-free, portable definition.
        """
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, walking from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]

    def poisson(self, lam: float) -> int:
        """Poisson count via Knuth's product-of-uniforms method.

        Draws one uniform per trial; lam <= 0 consumes no draws.
        Adequate for the small rates (< 10) used by the sampler.
        """
        if lam <= 0.0:
            return 0
        threshold = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= self.random()
            if p <= threshold:
                return k
            k += 1
