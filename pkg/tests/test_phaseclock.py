import math

import pytest
from hypothesis import given, strategies as st

from popproto.phaseclock import (
    BUFFER,
    EVEN,
    GAP_VIOLATION,
    ODD,
    ClockParams,
    circular_gap,
    clock_tick,
    estimate_drift,
    gamma_potential,
    gap,
    label,
    weight,
)
from popproto.rng import RngStream

P = ClockParams(rho=4, tc=3)  # psi = 16


def test_params_validation():
    assert P.psi == 16
    with pytest.raises(ValueError):
        ClockParams(rho=1, tc=1)
    with pytest.raises(ValueError):
        ClockParams(rho=4, tc=4)
    with pytest.raises(ValueError):
        ClockParams(rho=4, tc=0)
    with pytest.raises(ValueError):
        ClockParams(rho=4, tc=2, alpha=1.5)


def test_for_population_sizing():
    p = ClockParams.for_population(256, rho_mult=8.0)
    assert p.rho == math.ceil(8 * math.log(256))
    assert p.psi == 4 * p.rho
    assert 0 < p.tc < p.rho


def test_label_examples():
    assert label(0, P) == ODD
    assert label(8, P) == EVEN
    assert label(5, P) == BUFFER


def test_label_partition_counts():
    labels = [label(pos, P) for pos in range(P.psi)]
    assert labels.count(ODD) == P.rho
    assert labels.count(EVEN) == P.rho
    assert labels.count(BUFFER) == 2 * P.rho


def test_tick_lower_increments():
    assert clock_tick(5, 7, P) == (6, 7)


def test_tick_wrap_case_higher_increments():
    assert clock_tick(3, 14, P) == (3, 15)


def test_tick_top_position_wraps_to_zero():
    assert clock_tick(15, 15, P) == (15, 0)


def test_tick_gap_violation():
    assert circular_gap(2, 9, P) == 7
    assert clock_tick(2, 9, P) is GAP_VIOLATION


def test_tick_rejects_invalid_position():
    with pytest.raises(ValueError):
        clock_tick(16, 0, P)


def test_tick_tie_increments_responder():
    assert clock_tick(5, 5, P) == (5, 6)


@given(st.integers(0, 15), st.integers(0, 15))
def test_tick_increments_exactly_one(i, j):
    out = clock_tick(i, j, P)
    if out is GAP_VIOLATION:
        assert circular_gap(i, j, P) >= P.rho
        return
    a, b = out
    di = (a - i) % P.psi
    dj = (b - j) % P.psi
    assert sorted((di, dj)) == [0, 1]


def test_weight_examples():
    c = {2: 1, 14: 1}
    assert weight(2, c, P) == 18
    assert weight(14, c, P) == 14
    assert weight(5, {5: 3}, P) == 5


def test_gap_examples():
    assert gap({5: 7}, P) == 0
    assert gap({2: 1, 14: 1}, P) == 4
    assert gap({0: 1, 15: 1}, P) == 1


def test_gap_rejects_empty():
    with pytest.raises(ValueError):
        gap({}, P)


def test_gap_ignores_multiplicity():
    assert gap({2: 1, 14: 1}, P) == gap({2: 5, 14: 9}, P)


def test_gamma_floor():
    assert gamma_potential([0.0] * 10, 0.25) == pytest.approx(20.0)


def test_gamma_hand_value():
    assert gamma_potential([1.0, -1.0], math.log(2)) == pytest.approx(5.0)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8))
def test_gamma_negation_and_permutation_invariant(xs):
    g = gamma_potential(xs, 0.3)
    assert gamma_potential([-x for x in xs], 0.3) == pytest.approx(g)
    assert gamma_potential(sorted(xs), 0.3) == pytest.approx(g)


def test_drift_single_sample_is_observed_value():
    est = estimate_drift(8, P, [0] * 8, 1, RngStream(0))
    assert est.sample_count == 1
    assert est.gamma_after_mean > 0


def test_drift_nonnegative_at_floor():
    est = estimate_drift(16, P, [3] * 16, 500, RngStream(1))
    assert est.gamma_after_mean >= est.gamma_before


def test_drift_negative_when_skewed():
    p = ClockParams(rho=40, tc=30, alpha=0.25)
    start = [0] * 128 + [20] * 128
    est = estimate_drift(256, p, start, 10000, RngStream(2))
    assert est.gamma_after_mean < est.gamma_before


def _wrapped_weights(pos, p):
    c = {}
    for q in pos:
        c[q] = c.get(q, 0) + 1
    return [weight(q, c, p) for q in pos]


def test_wrapped_clock_matches_unbounded_counters():
    """With shared randomness, wrapped positions and unbounded two-choice
    counters stay coupled while the gap remains below rho: the per-agent
    weight profile equals the counter profile up to a common shift."""
    n = 24
    p = ClockParams(rho=12, tc=8)
    pos = [0] * n
    cnt = [0] * n
    rng = RngStream(99)
    for _ in range(4000):
        i = rng.randbelow(n)
        j = rng.randbelow(n - 1)
        if j >= i:
            j += 1
        out = clock_tick(pos[i], pos[j], p)
        assert out is not GAP_VIOLATION
        pos[i], pos[j] = out
        lo = i if cnt[i] < cnt[j] else j  # tie goes to the responder j
        cnt[lo] += 1
        ws = _wrapped_weights(pos, p)
        base_w, base_c = min(ws), min(cnt)
        assert [w - base_w for w in ws] == [c - base_c for c in cnt]
        assert max(cnt) - base_c < p.rho
