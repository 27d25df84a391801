"""Leaderless phase clock: tick rules, labels, weights, gap, and the
two-choice potential used for drift diagnostics.

Positions live on a loop of size psi = 4*rho. On a clock/clock meeting the
lower position increments, except when the pair straddles the wrap region
(min in [0, rho-1], max in [psi-rho, psi-1]), in which case the higher
increments; an increment landing on psi wraps to 0. Pairs whose circular
gap reaches rho signal a violation instead of ticking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .rng import RngStream

ODD = "ODD"
EVEN = "EVEN"
BUFFER = "BUFFER"

#: Sentinel returned by tick operations when the pair's gap is >= rho.
GAP_VIOLATION = object()


@dataclass(frozen=True)
class ClockParams:
    rho: int
    tc: int
    alpha: float = 0.25
    beta: int = 1

    def __post_init__(self):
        if self.rho < 2:
            raise ValueError("rho must be at least 2")
        if not 0 < self.tc < self.rho:
            raise ValueError("tc must satisfy 0 < tc < rho")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.beta < 1:
            raise ValueError("beta must be a positive integer")

    @property
    def psi(self) -> int:
        return 4 * self.rho

    @classmethod
    def for_population(
        cls,
        n: int,
        rho_mult: float = 8.0,
        tc_frac: float = 23 / 29,
        alpha: float = 0.25,
        beta: int = 1,
    ) -> "ClockParams":
        if n < 2:
            raise ValueError("population size must be at least 2")
        rho = max(2, math.ceil(rho_mult * math.log(n)))
        tc = min(max(1, math.ceil(tc_frac * rho)), rho - 1)
        return cls(rho=rho, tc=tc, alpha=alpha, beta=beta)


def _check_pos(pos: int, p: ClockParams) -> None:
    if not 0 <= pos < p.psi:
        raise ValueError(f"position {pos} outside [0, {p.psi})")


def label(pos: int, p: ClockParams) -> str:
    _check_pos(pos, p)
    if pos < p.rho:
        return ODD
    if 2 * p.rho <= pos < 3 * p.rho:
        return EVEN
    return BUFFER


def label_bit(pos: int, p: ClockParams) -> int:
    """0 for EVEN, 1 for ODD, -1 for BUFFER."""
    if pos < p.rho:
        return 1
    if 2 * p.rho <= pos < 3 * p.rho:
        return 0
    return -1


def circular_gap(i: int, j: int, p: ClockParams) -> int:
    d = abs(i - j)
    return min(d, p.psi - d)


def tick_one(my: int, other: int, p: ClockParams, i_am_responder: bool):
    """One-sided tick: the new position of `my`, or GAP_VIOLATION.

    The wrap rule is checked before the circular-gap violation so that
    pairs straddling the wrap region tick rather than fail. Equal
    positions tick on the responder's side.
    """
    _check_pos(my, p)
    _check_pos(other, p)
    lo, hi = (my, other) if my <= other else (other, my)
    if lo < p.rho and hi >= p.psi - p.rho:
        if my == hi:
            return (my + 1) % p.psi
        return my
    if circular_gap(my, other, p) >= p.rho:
        return GAP_VIOLATION
    if my < other or (my == other and i_am_responder):
        return (my + 1) % p.psi
    return my


def clock_tick(i: int, j: int, p: ClockParams):
    """Pairwise tick of (initiator position i, responder position j)."""
    a = tick_one(i, j, p, False)
    if a is GAP_VIOLATION:
        return GAP_VIOLATION
    b = tick_one(j, i, p, True)
    if b is GAP_VIOLATION:
        return GAP_VIOLATION
    return a, b


def weight(pos: int, c: Mapping[int, int], p: ClockParams) -> int:
    _check_pos(pos, p)
    if c.get(pos, 0) <= 0:
        raise ValueError("position does not occur in the configuration")
    if pos < p.rho and any(
        c.get(q, 0) > 0 for q in range(p.psi - p.rho, p.psi)
    ):
        return pos + p.psi
    return pos


def gap(c: Mapping[int, int], p: ClockParams) -> int:
    occupied = [pos for pos, cnt in c.items() if cnt > 0]
    if not occupied:
        raise ValueError("empty configuration")
    ws = [weight(pos, c, p) for pos in occupied]
    return max(ws) - min(ws)


def gamma_potential(x: Iterable[float], alpha: float) -> float:
    return sum(2.0 * math.cosh(alpha * v) for v in x)


@dataclass(frozen=True)
class DriftEstimate:
    gamma_before: float
    gamma_after_mean: float
    theta_hat: float
    sample_count: int


def estimate_drift(
    n: int,
    p: ClockParams,
    start: list[int],
    samples: int,
    rng: RngStream,
) -> DriftEstimate:
    """Monte Carlo one-step drift of the potential under the unbounded
    two-choice process (lower of two uniformly chosen counters increments)."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if len(start) != n or n < 2:
        raise ValueError("start must list one counter per agent, n >= 2")
    mean = sum(start) / n
    gamma_before = gamma_potential([u - mean for u in start], p.alpha)
    total_after = 0.0
    for _ in range(samples):
        u = list(start)
        i = rng.randbelow(n)
        j = rng.randbelow(n - 1)
        if j >= i:
            j += 1
        # lower counter increments; ties go to the responder j
        if u[i] < u[j]:
            u[i] += 1
        else:
            u[j] += 1
        mean2 = sum(u) / n
        total_after += gamma_potential([v - mean2 for v in u], p.alpha)
    after_mean = total_after / samples
    theta_hat = after_mean - (1.0 - p.alpha / n) * gamma_before
    return DriftEstimate(
        gamma_before=gamma_before,
        gamma_after_mean=after_mean,
        theta_hat=theta_hat,
        sample_count=samples,
    )
