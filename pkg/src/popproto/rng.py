"""Deterministic seedable random streams.

All randomness in the package flows through splitmix64 streams so that a
run is reproducible from a single 64-bit seed, and per-trial seeds can be
derived from a master seed without correlation between trials.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Return the seed for sub-stream `index` of a master seed."""
    if index < 0:
        raise ValueError("stream index must be non-negative")
    z = (master_seed + (index + 1) * _GOLDEN) & MASK64
    return _mix(z)


class RngStream:
    """splitmix64 generator; identical output to the simulation kernels."""

    algorithm = "splitmix64"

    def __init__(self, seed: int):
        self._state = seed & MASK64
        self.seed = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return _mix(self._state)

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        rem = (1 << 64) % bound
        limit = MASK64 - rem
        while True:
            z = self.next_u64()
            if z <= limit:
                return z % bound

    def spawn(self, index: int) -> "RngStream":
        return RngStream(derive_seed(self.seed, index))
