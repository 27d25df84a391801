"""Phased exact-majority protocol.

Agents are workers, clocks, backups, or terminators. Workers carry a
phase, a value in {0, 1/2, 1} and a preference; odd phases cancel opposing
value-1 workers (possibly minting a clock), even phases split a unit of
value between a strong and a weak worker. Clocks drive phase advances via
their ODD/EVEN labels. Any inconsistency (phase skew, clock gap,
preference conflict at a terminator) drops the pair into the four-state
backup protocol keyed on the original inputs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

from . import fourstate
from .core import AgentPopulation, Protocol
from .phaseclock import GAP_VIOLATION, ClockParams, label_bit, tick_one

WIN_A = "WIN_A"
WIN_B = "WIN_B"

ZERO = Fraction(0)
HALF = Fraction(1, 2)
ONE = Fraction(1)


@dataclass(frozen=True)
class Worker:
    phase: int
    value: Fraction
    preference: str
    initial_state: str
    clock_creation: bool

    def __post_init__(self):
        if self.value not in (ZERO, HALF, ONE):
            raise ValueError("worker value must be 0, 1/2 or 1")


@dataclass(frozen=True)
class Clock:
    position: int
    preference: str
    initial_state: str
    clock_creation: bool


@dataclass(frozen=True)
class Backup:
    b4: str  # one of fourstate.STATES
    initial_state: str
    clock_creation: bool


@dataclass(frozen=True)
class Terminator:
    preference: str  # WIN_A for D_A, WIN_B for D_B
    initial_state: str
    clock_creation: bool


MajState = Union[Worker, Clock, Backup, Terminator]


@dataclass(frozen=True)
class MajorityParams:
    n: int
    clock: ClockParams
    m_phases: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("population size must be at least 2")
        if self.m_phases % 2 != 1 or self.m_phases < 3:
            raise ValueError("m_phases must be odd and at least 3")

    @classmethod
    def default(
        cls,
        n: int,
        rho_mult: float = 8.0,
        tc_frac: float = 23 / 29,
        beta: int = 1,
    ) -> "MajorityParams":
        clock = ClockParams.for_population(
            n, rho_mult=rho_mult, tc_frac=tc_frac, beta=beta
        )
        return cls(n=n, clock=clock, m_phases=2 * math.ceil(math.log2(n)) + 1)


def initial_config(n: int, eps: Fraction, majority_side: str) -> AgentPopulation:
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must be in [0, 1]")
    eps_n = eps * n
    if eps_n.denominator != 1 or (n - eps_n.numerator) % 2 != 0:
        raise ValueError("eps*n must be an integer with the same parity as n")
    eps_n = eps_n.numerator
    if majority_side not in ("A", "B"):
        raise ValueError("majority_side must be 'A' or 'B'")
    minority_side = "B" if majority_side == "A" else "A"
    hi = (n + eps_n) // 2
    lo = (n - eps_n) // 2
    pref = {"A": WIN_A, "B": WIN_B}
    agents = [
        Worker(1, ONE, pref[majority_side], majority_side, True) for _ in range(hi)
    ] + [
        Worker(1, ONE, pref[minority_side], minority_side, True) for _ in range(lo)
    ]
    return AgentPopulation(agents)


def backup_rule(s: str, o: str) -> str:
    return fourstate.fourstate_update(s, o)


def _to_backup(s: MajState, clock_creation: bool) -> Backup:
    return Backup(
        b4="A" if s.initial_state == "A" else "B",
        initial_state=s.initial_state,
        clock_creation=clock_creation,
    )


def term_preference(s: MajState) -> Terminator:
    if isinstance(s, Backup):
        raise ValueError("backup states carry no preference")
    if isinstance(s, Terminator):
        return s
    return Terminator(
        preference=s.preference,
        initial_state=s.initial_state,
        clock_creation=s.clock_creation,
    )


def _pref_conflict(s: MajState, o: MajState) -> bool:
    return term_preference(s).preference != term_preference(o).preference


def _is_strong(s: MajState) -> bool:
    return isinstance(s, Worker) and s.value != ZERO


def maj_update(S: MajState, O: MajState, p: MajorityParams, responder: bool = False) -> MajState:
    """One-sided update; the pair step applies it to both orderings."""
    # Backups absorb.
    if isinstance(S, Backup) or isinstance(O, Backup):
        if isinstance(S, Backup) and isinstance(O, Backup):
            return replace(S, b4=backup_rule(S.b4, O.b4))
        if isinstance(O, Backup):
            return _to_backup(S, S.clock_creation)
        return S
    # Terminators spread their decision or expose a conflict.
    if isinstance(S, Terminator) or isinstance(O, Terminator):
        if _pref_conflict(S, O):
            return _to_backup(S, S.clock_creation)
        return term_preference(S)
    # Both are workers or clocks from here on.
    cc = S.clock_creation and O.clock_creation
    pref = S.preference
    if not _is_strong(S) and _is_strong(O):
        pref = O.preference
    if isinstance(S, Clock):
        pos = S.position
        if isinstance(O, Clock):
            t = tick_one(S.position, O.position, p.clock, responder)
            if t is GAP_VIOLATION:
                return _to_backup(S, cc)
            pos = t
            if S.position >= p.clock.tc:
                cc = False
        return Clock(position=pos, preference=pref,
                     initial_state=S.initial_state, clock_creation=cc)
    # S is a worker.
    phi = S.phase
    if isinstance(O, Clock):
        lbl = label_bit(O.position, p.clock)
        inc = lbl >= 0 and phi % 2 == 1 - lbl
    else:
        inc = phi == O.phase - 1
    if inc:
        if phi == p.m_phases or (phi % 2 == 0 and S.value == ONE):
            return Terminator(preference=S.preference,
                              initial_state=S.initial_state, clock_creation=cc)
        value = ONE if (phi % 2 == 0 and S.value == HALF) else S.value
        return Worker(phase=phi + 1, value=value, preference=pref,
                      initial_state=S.initial_state, clock_creation=cc)
    if isinstance(O, Clock):
        return replace(S, preference=pref, clock_creation=cc)
    # Worker meets worker, no phase advance.
    if abs(phi - O.phase) > 1:
        return _to_backup(S, cc)
    if phi != O.phase:
        return replace(S, preference=pref, clock_creation=cc)
    if phi % 2 == 1:
        # Cancellation phase.
        if S.value == ONE and O.value == ONE and _pref_conflict(S, O):
            if cc and S.preference == WIN_A:
                return Clock(position=0, preference=S.preference,
                             initial_state=S.initial_state, clock_creation=cc)
            return Worker(phase=phi, value=ZERO, preference=pref,
                          initial_state=S.initial_state, clock_creation=cc)
    else:
        # Doubling phase.
        if S.value + O.value == ONE:
            return Worker(phase=phi, value=HALF, preference=pref,
                          initial_state=S.initial_state, clock_creation=cc)
    return replace(S, preference=pref, clock_creation=cc)


def q_potential(c: Counter, n: int) -> Fraction:
    """Signed worker potential: +value*2^(ceil(log2 n) - floor((phase-1)/2))
    per WIN_A worker, negated for WIN_B; other roles contribute 0."""
    big_l = math.ceil(math.log2(n))
    total = Fraction(0)
    for s, cnt in c.items():
        if isinstance(s, Worker):
            term = s.value * Fraction(2) ** (big_l - (s.phase - 1) // 2)
            total += (term if s.preference == WIN_A else -term) * cnt
    return total


def delta_weak(c: Counter) -> int:
    weak = sum(cnt for s, cnt in c.items()
               if isinstance(s, Worker) and s.value == ZERO)
    full = sum(cnt for s, cnt in c.items()
               if isinstance(s, Worker) and s.value == ONE)
    return weak - full


def stability_certificate(c: Counter) -> Optional[str]:
    term_prefs = set()
    b4 = Counter()
    for s, cnt in c.items():
        if cnt == 0:
            continue
        if isinstance(s, Terminator):
            term_prefs.add(s.preference)
        elif isinstance(s, Backup):
            b4[s.b4] += cnt
        else:
            return None
        if term_prefs and b4:
            return None
    if term_prefs:
        if len(term_prefs) == 1:
            return next(iter(term_prefs))
        return None
    return fourstate.certificate(b4)


class MajorityProtocol(Protocol):
    def __init__(self, params: MajorityParams):
        self.params = params

    def update(self, s: MajState, o: MajState, responder: bool) -> MajState:
        return maj_update(s, o, self.params, responder)

    def state_name(self, s: MajState) -> str:
        cc = int(s.clock_creation)
        if isinstance(s, Worker):
            return f"W(p={s.phase};v={s.value};pref={s.preference[-1]};init={s.initial_state};cc={cc})"
        if isinstance(s, Clock):
            return f"C(pos={s.position};pref={s.preference[-1]};init={s.initial_state};cc={cc})"
        if isinstance(s, Backup):
            return f"K(b4={s.b4};init={s.initial_state};cc={cc})"
        return f"T(pref={s.preference[-1]};init={s.initial_state};cc={cc})"

    def output(self, s: MajState) -> str:
        if isinstance(s, Backup):
            return fourstate.OUTPUT[s.b4]
        return s.preference
