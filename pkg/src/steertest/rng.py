"""Deterministic pseudo-randomness.

Everything random in this toolkit (search decisions, synthetic weights,
rain/fog noise) flows from the splitmix64 generator below, so a single
64-bit seed reproduces a whole run byte-for-byte on any platform.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash64(*parts: int) -> int:
    """Stateless 64-bit hash of integer parts (splitmix64 finalizer chain)."""
    z = 0
    for p in parts:
        z = (z + (p & _MASK) + _GAMMA) & _MASK
        z = _mix(z)
    return z


def hash01(*parts: int) -> float:
    """Stateless hash mapped to [0, 1) with 53-bit resolution."""
    return (hash64(*parts) >> 11) * (2.0 ** -53)


class SplitMix64:
    """Sequential splitmix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def next_float(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randint(self, n: int) -> int:
        """Uniform in [0, n). Modulo bias is negligible for n << 2**64."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def fork(self) -> "SplitMix64":
        """Independent child stream derived from the parent state."""
        return SplitMix64(self.next_u64())
