"""Portable 64-bit RNG used for every stochastic draw in the simulator.

The generator is splitmix64 (Steele, Lea & Flood): one 64-bit word of
state, a Weyl increment, and a finalizer of xor-shifts and multiplies.
It is trivial to reimplement identically in C, which is exactly what the
compiled tick kernel does; the Python and Cython streams are bit-equal.

Uniform doubles take the top 53 bits: ``(x >> 11) * 2**-53`` in [0, 1).
Gaussians use the cosine Box-Muller transform on two uniforms (the sine
twin is discarded so the draw count stays fixed at two per normal).
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53


class SplitMix64:
    """Deterministic 64-bit generator with an inspectable single-word state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_uint64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Next double in [0, 1)."""
        return (self.next_uint64() >> 11) * _INV_2_53

    def gauss(self) -> float:
        """Standard normal via Box-Muller; consumes exactly two uniforms
        (plus redraws of the first on the measure-zero event u1 == 0)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def getstate(self) -> int:
        return self.state

    def setstate(self, state: int) -> None:
        self.state = state & _MASK
