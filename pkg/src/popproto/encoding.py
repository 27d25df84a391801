"""Conversions between object-level agent states and packed kernel codes."""

from __future__ import annotations

from fractions import Fraction

from . import fourstate, leader, majority
from .kernels import pure as enc

_HALVES = {Fraction(0): 0, Fraction(1, 2): 1, Fraction(1): 2}
_FROM_HALVES = {v: k for k, v in _HALVES.items()}


def encode_maj(s: majority.MajState) -> int:
    initb = enc.F_INITB if s.initial_state == "B" else 0
    cc = enc.F_CC if s.clock_creation else 0
    if isinstance(s, majority.Worker):
        prefb = enc.F_PREFB if s.preference == majority.WIN_B else 0
        return (
            enc.TAG_WORKER | initb | cc | prefb
            | (_HALVES[s.value] << enc.VAL_SHIFT)
            | (s.phase << enc.NUM_SHIFT)
        )
    if isinstance(s, majority.Clock):
        prefb = enc.F_PREFB if s.preference == majority.WIN_B else 0
        return (
            enc.TAG_CLOCK | initb | cc | prefb | (s.position << enc.NUM_SHIFT)
        )
    if isinstance(s, majority.Backup):
        return (
            enc.TAG_BACKUP | initb | cc
            | (fourstate.STATES.index(s.b4) << enc.VAL_SHIFT)
        )
    prefb = enc.F_PREFB if s.preference == majority.WIN_B else 0
    return enc.TAG_TERM | initb | cc | prefb


def decode_maj(code: int) -> majority.MajState:
    tag = code & 3
    init = "B" if code & enc.F_INITB else "A"
    cc = bool(code & enc.F_CC)
    pref = majority.WIN_B if code & enc.F_PREFB else majority.WIN_A
    if tag == enc.TAG_WORKER:
        return majority.Worker(
            phase=code >> enc.NUM_SHIFT,
            value=_FROM_HALVES[(code >> enc.VAL_SHIFT) & 3],
            preference=pref,
            initial_state=init,
            clock_creation=cc,
        )
    if tag == enc.TAG_CLOCK:
        return majority.Clock(
            position=code >> enc.NUM_SHIFT,
            preference=pref,
            initial_state=init,
            clock_creation=cc,
        )
    if tag == enc.TAG_BACKUP:
        return majority.Backup(
            b4=fourstate.STATES[(code >> enc.VAL_SHIFT) & 3],
            initial_state=init,
            clock_creation=cc,
        )
    return majority.Terminator(
        preference=pref, initial_state=init, clock_creation=cc
    )


def encode_le(s: leader.LEState) -> int:
    coin = enc.LF_COIN if s.coin else 0
    cc = enc.LF_CC if s.clock_creation else 0
    if isinstance(s, leader.Contender):
        return (
            enc.LE_CONT | coin | cc
            | (enc.LF_CREATED if s.created else 0)
            | (enc.LF_INTER if s.intermediate else 0)
            | (enc.LF_HIGH if s.indicator == leader.HIGH else 0)
            | (s.phase << enc.NUM_SHIFT)
        )
    if isinstance(s, leader.Follower):
        return (
            enc.LE_FOLL | coin | cc
            | (enc.LF_HIGH if s.best_indicator == leader.HIGH else 0)
            | (s.best_phase << enc.NUM_SHIFT)
        )
    return enc.LE_CLOCK | coin | cc | (s.position << enc.NUM_SHIFT)


def decode_le(code: int) -> leader.LEState:
    tag = code & 3
    coin = 1 if code & enc.LF_COIN else 0
    cc = bool(code & enc.LF_CC)
    if tag == enc.LE_CONT:
        return leader.Contender(
            phase=code >> enc.NUM_SHIFT,
            indicator=leader.HIGH if code & enc.LF_HIGH else leader.LOW,
            created=bool(code & enc.LF_CREATED),
            intermediate=bool(code & enc.LF_INTER),
            coin=coin,
            clock_creation=cc,
        )
    if tag == enc.LE_FOLL:
        return leader.Follower(
            best_phase=code >> enc.NUM_SHIFT,
            best_indicator=leader.HIGH if code & enc.LF_HIGH else leader.LOW,
            coin=coin,
            clock_creation=cc,
        )
    return leader.LEClock(
        position=code >> enc.NUM_SHIFT, coin=coin, clock_creation=cc
    )


def encode_fourstate(s: str) -> int:
    return fourstate.STATES.index(s)


def decode_fourstate(code: int) -> str:
    return fourstate.STATES[code]
