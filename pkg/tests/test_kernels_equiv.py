"""Pure-Python and compiled kernels must be interchangeable, and both must
agree with the object-level protocol implementations step for step."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from popproto import encoding, fourstate, leader, majority
from popproto.core import run_until
from popproto.kernels import BACKEND, pure
from popproto.rng import RngStream

compiled = pytest.importorskip(
    "popproto.kernels._speedups", reason="compiled extension not built"
)

MAJ_PARAMS = majority.MajorityParams.default(64)
LE_PARAMS = leader.LEParams.default(64)


def _maj_args(n=64, eps=Fraction(1, 4), seed=42, **kw):
    params = majority.MajorityParams.default(n)
    pop = majority.initial_config(n, eps, "A")
    codes = [encoding.encode_maj(s) for s in pop.agents]
    base = dict(
        check_level=2, sample_every=n, eps_n=int(eps * n),
        majority_is_a=True, record_trace=True,
    )
    base.update(kw)
    return (
        codes, params.clock.rho, params.clock.psi, params.clock.tc,
        params.m_phases, math.ceil(math.log2(n)), seed, 2 * 10**6,
    ), base


def test_backend_is_reported():
    assert BACKEND in ("pure", "compiled")


def test_maj_run_identical_across_backends():
    args, kw = _maj_args()
    assert pure.maj_run(*args, **kw) == compiled.maj_run(*args, **kw)


def test_le_run_identical_across_backends():
    p = LE_PARAMS
    codes = [encoding.encode_le(s) for s in leader.le_initial(64).agents]
    args = (codes, p.clock.rho, p.clock.psi, p.clock.tc, p.m, 7, 10**6)
    kw = dict(check_level=2, sample_every=64, record_trace=True)
    assert pure.le_run(*args, **kw) == compiled.le_run(*args, **kw)


def test_fourstate_run_identical_across_backends():
    counts = fourstate.initial_counts(48, 8)
    codes = [
        encoding.encode_fourstate(s)
        for s in fourstate.STATES
        for _ in range(counts[s])
    ]
    assert pure.fourstate_run(codes, 3, 10**7, record_trace=True) == \
        compiled.fourstate_run(codes, 3, 10**7, record_trace=True)


def test_clock_run_identical_across_backends():
    rho = math.ceil(8 * math.log(128))
    a = pure.clock_run(128, rho, 5, 100000, sample_every=128, alpha=0.25)
    b = compiled.clock_run(128, rho, 5, 100000, sample_every=128, alpha=0.25)
    assert a == b


def test_rumor_run_identical_across_backends():
    assert pure.rumor_run(500, 250, 9, 10**8) == \
        compiled.rumor_run(500, 250, 9, 10**8)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32), st.booleans())
def test_maj_update_code_matches_across_backends(r1, r2, resp):
    s = _random_maj_code(r1)
    o = _random_maj_code(r2)
    p = MAJ_PARAMS
    assert pure.maj_update_code(
        s, o, resp, p.clock.rho, p.clock.psi, p.clock.tc, p.m_phases
    ) == compiled.maj_update_code(
        s, o, resp, p.clock.rho, p.clock.psi, p.clock.tc, p.m_phases
    )


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32), st.booleans())
def test_maj_update_code_matches_objects(r1, r2, resp):
    s = _random_maj_code(r1)
    o = _random_maj_code(r2)
    p = MAJ_PARAMS
    got = pure.maj_update_code(
        s, o, resp, p.clock.rho, p.clock.psi, p.clock.tc, p.m_phases
    )
    want = majority.maj_update(
        encoding.decode_maj(s), encoding.decode_maj(o), p, resp
    )
    assert encoding.decode_maj(got) == want


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32), st.booleans())
def test_le_update_code_matches_objects(r1, r2, resp):
    s = _random_le_code(r1)
    o = _random_le_code(r2)
    p = LE_PARAMS
    got = pure.le_update_code(
        s, o, resp, p.clock.rho, p.clock.psi, p.clock.tc, p.m
    )
    want = leader.le_update(
        encoding.decode_le(s), encoding.decode_le(o), p, resp
    )
    assert encoding.decode_le(got) == want
    assert got == compiled.le_update_code(
        s, o, resp, p.clock.rho, p.clock.psi, p.clock.tc, p.m
    )


def _random_maj_code(r):
    rng = RngStream(r)
    tag = rng.randbelow(4)
    flags = rng.randbelow(2) * pure.F_INITB | rng.randbelow(2) * pure.F_CC
    if tag == pure.TAG_WORKER:
        phase = 1 + rng.randbelow(MAJ_PARAMS.m_phases)
        val = rng.randbelow(3)
        return (
            pure.TAG_WORKER | flags | rng.randbelow(2) * pure.F_PREFB
            | (val << pure.VAL_SHIFT) | (phase << pure.NUM_SHIFT)
        )
    if tag == pure.TAG_CLOCK:
        pos = rng.randbelow(MAJ_PARAMS.clock.psi)
        return (
            pure.TAG_CLOCK | flags | rng.randbelow(2) * pure.F_PREFB
            | (pos << pure.NUM_SHIFT)
        )
    if tag == pure.TAG_BACKUP:
        return pure.TAG_BACKUP | flags | (rng.randbelow(4) << pure.VAL_SHIFT)
    return pure.TAG_TERM | flags | rng.randbelow(2) * pure.F_PREFB


def _random_le_code(r):
    rng = RngStream(r)
    tag = rng.randbelow(3)
    flags = rng.randbelow(2) * pure.LF_COIN | rng.randbelow(2) * pure.LF_CC
    if tag == 0:
        phase = 1 + rng.randbelow(LE_PARAMS.m)
        return (
            pure.LE_CONT | flags
            | rng.randbelow(2) * pure.LF_CREATED
            | rng.randbelow(2) * pure.LF_INTER
            | rng.randbelow(2) * pure.LF_HIGH
            | (phase << pure.NUM_SHIFT)
        )
    if tag == 1:
        phase = 1 + rng.randbelow(LE_PARAMS.m)
        return (
            pure.LE_FOLL | flags | rng.randbelow(2) * pure.LF_HIGH
            | (phase << pure.NUM_SHIFT)
        )
    pos = rng.randbelow(LE_PARAMS.clock.psi)
    return pure.LE_CLOCK | flags | (pos << pure.NUM_SHIFT)


def test_object_driver_reproduces_kernel_run_majority():
    n = 16
    params = majority.MajorityParams.default(n)
    pop = majority.initial_config(n, Fraction(1, 4), "A")
    codes = [encoding.encode_maj(s) for s in pop.agents]
    res = pure.maj_run(
        codes, params.clock.rho, params.clock.psi, params.clock.tc,
        params.m_phases, math.ceil(math.log2(n)), 99, 500000, check_level=0,
    )
    proto = majority.MajorityProtocol(params)
    rep = run_until(
        pop, proto,
        lambda c: majority.stability_certificate(c) is not None,
        500000, RngStream(99),
    )
    assert rep.interactions_to_certificate == res["certificate_step"]
    assert sorted(encoding.encode_maj(s) for s in pop.agents) == \
        sorted(res["final_codes"])


def test_object_driver_reproduces_kernel_run_leader():
    n = 16
    p = leader.LEParams.default(n)
    pop = leader.le_initial(n)
    codes = [encoding.encode_le(s) for s in pop.agents]
    res = pure.le_run(
        codes, p.clock.rho, p.clock.psi, p.clock.tc, p.m, 4, 500000,
        check_level=0,
    )
    proto = leader.LeaderProtocol(p)
    rep = run_until(pop, proto, leader.le_certificate, 500000, RngStream(4))
    assert rep.interactions_to_certificate == res["certificate_step"]
    assert sorted(encoding.encode_le(s) for s in pop.agents) == \
        sorted(res["final_codes"])


def test_encoding_round_trips():
    for r in range(200):
        code = _random_maj_code(r)
        assert encoding.encode_maj(encoding.decode_maj(code)) == code
        lcode = _random_le_code(r)
        assert encoding.encode_le(encoding.decode_le(lcode)) == lcode
    for s in fourstate.STATES:
        assert encoding.decode_fourstate(encoding.encode_fourstate(s)) == s
