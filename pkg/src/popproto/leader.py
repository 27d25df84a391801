"""Phased leader election.

Contenders carry a (phase, High/Low) pair, ordered lexicographically with
High > Low; meeting any agent with a strictly larger pair demotes a
contender to a follower. Followers track the maximum pair they have seen.
Phase advances are driven by clock labels and happen in two steps through
an intermediate state so the High/Low indicator is drawn from the
partner's alternating coin bit (a synthetic coin flip).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Union

from .core import AgentPopulation, Protocol
from .phaseclock import GAP_VIOLATION, ClockParams, label_bit, tick_one

HIGH = "High"
LOW = "Low"


@dataclass(frozen=True)
class Contender:
    phase: int
    indicator: str
    created: bool
    intermediate: bool
    coin: int
    clock_creation: bool


@dataclass(frozen=True)
class Follower:
    best_phase: int
    best_indicator: str
    coin: int
    clock_creation: bool


@dataclass(frozen=True)
class LEClock:
    position: int
    coin: int
    clock_creation: bool


LEState = Union[Contender, Follower, LEClock]


@dataclass(frozen=True)
class LEParams:
    n: int
    clock: ClockParams
    m: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("population size must be at least 2")
        if self.m < 1:
            raise ValueError("phase cap must be at least 1")

    @classmethod
    def default(
        cls,
        n: int,
        phases_mult: float = 8.0,
        rho_mult: float = 8.0,
        tc_frac: float = 23 / 29,
        beta: int = 1,
    ) -> "LEParams":
        clock = ClockParams.for_population(
            n, rho_mult=rho_mult, tc_frac=tc_frac, beta=beta
        )
        return cls(n=n, clock=clock, m=max(1, math.ceil(phases_mult * math.log2(n))))


def pair_compare(p1: tuple[int, str], p2: tuple[int, str]) -> int:
    """-1, 0 or 1 ordering of (phase, indicator) pairs, High > Low."""
    k1 = (p1[0], 1 if p1[1] == HIGH else 0)
    k2 = (p2[0], 1 if p2[1] == HIGH else 0)
    return (k1 > k2) - (k1 < k2)


def _pair(s: LEState) -> tuple[int, str]:
    if isinstance(s, Contender):
        return (s.phase, s.indicator)
    return (s.best_phase, s.best_indicator)


def le_initial(n: int) -> AgentPopulation:
    if n < 2:
        raise ValueError("population size must be at least 2")
    return AgentPopulation(
        [Contender(1, HIGH, False, False, 0, True) for _ in range(n)]
    )


def le_certificate(c: Counter) -> bool:
    return sum(cnt for s, cnt in c.items() if isinstance(s, Contender)) == 1


def le_update(S: LEState, O: LEState, p: LEParams, responder: bool = False) -> LEState:
    coin = 1 - S.coin
    # A partner in the intermediate state is almost a missed interaction.
    if isinstance(O, Contender) and O.intermediate:
        return replace(S, coin=coin)
    cc = S.clock_creation and O.clock_creation
    if isinstance(S, Contender) and S.intermediate:
        # Second step of the phase advance: the indicator comes from the
        # partner's coin as it was before this interaction.
        return Contender(
            phase=S.phase + 1,
            indicator=HIGH if O.coin == 1 else LOW,
            created=S.created,
            intermediate=False,
            coin=coin,
            clock_creation=cc,
        )
    if isinstance(S, LEClock):
        pos = S.position
        if isinstance(O, LEClock):
            t = tick_one(S.position, O.position, p.clock, responder)
            if t is GAP_VIOLATION:
                # No backup role here; a desynchronized clock retires to a
                # follower with the minimal pair, which can never eliminate.
                return Follower(1, LOW, coin, cc)
            pos = t
            if S.position >= p.clock.tc:
                cc = False
        return LEClock(position=pos, coin=coin, clock_creation=cc)
    if isinstance(S, Contender):
        if isinstance(O, LEClock):
            lbl = label_bit(O.position, p.clock)
            if S.phase < p.m and lbl >= 0 and S.phase % 2 == 1 - lbl:
                return replace(S, intermediate=True, coin=coin, clock_creation=cc)
            return replace(S, coin=coin, clock_creation=cc)
        cmp = pair_compare(_pair(O), _pair(S))
        if cmp > 0:
            op = _pair(O)
            return Follower(op[0], op[1], coin, cc)
        if cmp < 0 or isinstance(O, Follower):
            return replace(S, coin=coin, clock_creation=cc)
        # Two contenders with equal pairs.
        if not S.created and not O.created and cc:
            if not responder:
                return LEClock(position=0, coin=coin, clock_creation=cc)
            return replace(S, created=True, coin=coin, clock_creation=cc)
        if S.created and not O.created:
            return Follower(S.phase, S.indicator, coin, cc)
        if O.created and not S.created:
            return replace(S, coin=coin, clock_creation=cc)
        # Both created, or clock creation is off: the initiator steps down.
        if not responder:
            return Follower(S.phase, S.indicator, coin, cc)
        return replace(S, coin=coin, clock_creation=cc)
    # S is a follower.
    if isinstance(O, LEClock):
        return replace(S, coin=coin, clock_creation=cc)
    if pair_compare(_pair(O), _pair(S)) > 0:
        op = _pair(O)
        return Follower(op[0], op[1], coin, cc)
    return replace(S, coin=coin, clock_creation=cc)


class LeaderProtocol(Protocol):
    def __init__(self, params: LEParams):
        self.params = params

    def update(self, s: LEState, o: LEState, responder: bool) -> LEState:
        return le_update(s, o, self.params, responder)

    def state_name(self, s: LEState) -> str:
        if isinstance(s, Contender):
            im = int(s.intermediate)
            return (f"L(p={s.phase};ind={s.indicator};cr={int(s.created)};"
                    f"im={im};coin={s.coin};cc={int(s.clock_creation)})")
        if isinstance(s, Follower):
            return (f"F(p={s.best_phase};ind={s.best_indicator};"
                    f"coin={s.coin};cc={int(s.clock_creation)})")
        return f"C(pos={s.position};coin={s.coin};cc={int(s.clock_creation)})"

    def output(self, s: LEState) -> str:
        return "Win" if isinstance(s, Contender) else "Lose"
