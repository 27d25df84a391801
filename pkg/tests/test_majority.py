from collections import Counter
from fractions import Fraction

import pytest

from popproto import majority
from popproto.core import config_of, run_until
from popproto.majority import (
    HALF,
    ONE,
    WIN_A,
    WIN_B,
    ZERO,
    Backup,
    Clock,
    MajorityParams,
    Terminator,
    Worker,
    delta_weak,
    initial_config,
    maj_update,
    q_potential,
    stability_certificate,
    term_preference,
)
from popproto.phaseclock import ClockParams
from popproto.rng import RngStream

# small fixed parameters: rho=4, psi=16, tc=3, 5 phases
P = MajorityParams(n=16, clock=ClockParams(rho=4, tc=3), m_phases=5)


def W(phase, value, pref, init="A", cc=True):
    return Worker(phase, Fraction(value), pref, init, cc)


def test_params_validation():
    with pytest.raises(ValueError):
        MajorityParams(n=16, clock=P.clock, m_phases=4)
    p = MajorityParams.default(16)
    assert p.m_phases == 2 * 4 + 1


def test_initial_config_counts():
    pop = initial_config(4, Fraction(1, 2), "A")
    prefs = Counter(s.preference for s in pop.agents)
    assert prefs == Counter({WIN_A: 3, WIN_B: 1})
    assert all(
        isinstance(s, Worker) and s.phase == 1 and s.value == ONE
        and s.clock_creation
        for s in pop.agents
    )
    pop = initial_config(4, Fraction(0), "A")
    prefs = Counter(s.preference for s in pop.agents)
    assert prefs == Counter({WIN_A: 2, WIN_B: 2})


def test_initial_config_parity_error():
    with pytest.raises(ValueError):
        initial_config(4, Fraction(1, 4), "A")
    with pytest.raises(ValueError):
        initial_config(4, Fraction(3, 2), "A")


def test_worker_value_domain():
    with pytest.raises(ValueError):
        Worker(1, Fraction(1, 3), WIN_A, "A", True)


def test_term_preference():
    d_a = Terminator(WIN_A, "A", True)
    assert term_preference(d_a) is d_a
    assert term_preference(W(1, 1, WIN_B)).preference == WIN_B
    with pytest.raises(ValueError):
        term_preference(Backup("A", "A", True))


# --- maj_update behavior, one example per pseudocode rule ---


def test_cancellation_mints_clock_on_a_side():
    s = W(1, 1, WIN_A)
    o = W(1, 1, WIN_B)
    s2 = maj_update(s, o, P)
    o2 = maj_update(o, s, P, responder=True)
    assert s2 == Clock(0, WIN_A, "A", True)
    assert o2 == W(1, 0, WIN_B)


def test_cancellation_without_clock_creation():
    s = W(1, 1, WIN_A, cc=False)
    o = W(1, 1, WIN_B, cc=False)
    assert maj_update(s, o, P).value == ZERO
    assert maj_update(o, s, P, True).value == ZERO


def test_doubling_splits_unit():
    s = W(2, 1, WIN_A)
    o = W(2, 0, WIN_A)
    assert maj_update(s, o, P).value == HALF
    assert maj_update(o, s, P, True).value == HALF


def test_phase_skew_becomes_backup():
    s = W(1, 1, WIN_A)
    o = W(3, 1, WIN_A)
    assert maj_update(s, o, P) == Backup("A", "A", True)


def test_worker_advances_on_even_clock():
    s = W(1, 0, WIN_A)
    clock = Clock(2 * P.clock.rho, WIN_A, "A", True)  # EVEN label
    s2 = maj_update(s, clock, P)
    assert isinstance(s2, Worker) and s2.phase == 2


def test_worker_ignores_buffer_clock():
    s = W(1, 0, WIN_A)
    clock = Clock(P.clock.rho, WIN_A, "A", True)  # BUFFER label
    assert maj_update(s, clock, P).phase == 1


def test_strong_even_worker_terminates_on_odd_clock():
    s = W(2, 1, WIN_B, init="B")
    clock = Clock(0, WIN_A, "A", True)  # ODD label
    s2 = maj_update(s, clock, P)
    assert s2 == Terminator(WIN_B, "B", True)


def test_half_value_promotes_to_one_entering_odd_phase():
    s = W(2, HALF, WIN_A)
    clock = Clock(0, WIN_A, "A", True)
    s2 = maj_update(s, clock, P)
    assert s2 == W(3, 1, WIN_A)


def test_worker_advances_on_worker_one_phase_ahead():
    s = W(1, 0, WIN_A)
    o = W(2, HALF, WIN_A)
    assert maj_update(s, o, P).phase == 2


def test_terminator_conflict_backs_up():
    d_a = Terminator(WIN_A, "A", True)
    o = W(1, 1, WIN_B, init="B")
    assert maj_update(d_a, o, P) == Backup("A", "A", True)
    assert maj_update(o, d_a, P, True) == Backup("B", "B", True)


def test_terminator_spreads():
    d_a = Terminator(WIN_A, "A", True)
    o = W(3, 0, WIN_A)
    assert maj_update(o, d_a, P, True) == Terminator(WIN_A, "A", True)


def test_clock_clears_creation_flag_at_threshold():
    s = Clock(P.clock.tc, WIN_A, "A", True)
    o = Clock(P.clock.tc, WIN_A, "A", True)
    assert maj_update(s, o, P).clock_creation is False
    below = Clock(P.clock.tc - 1, WIN_A, "A", True)
    assert maj_update(below, below, P).clock_creation is True


def test_clock_gap_violation_backs_up():
    s = Clock(2, WIN_A, "A", True)
    o = Clock(9, WIN_A, "A", True)
    assert maj_update(s, o, P) == Backup("A", "A", True)


def test_max_phase_worker_terminates():
    s = W(P.m_phases, 0, WIN_A)
    clock = Clock(2 * P.clock.rho, WIN_A, "A", True)  # EVEN, phase 5 is odd
    s2 = maj_update(s, clock, P)
    assert s2 == Terminator(WIN_A, "A", True)


def test_weak_adopts_strong_preference():
    s = W(1, 0, WIN_A)
    o = W(1, 1, WIN_B, init="B")
    assert maj_update(s, o, P).preference == WIN_B
    # strong workers never adopt
    s = W(1, 1, WIN_A)
    o2 = W(2, HALF, WIN_B, init="B")
    assert maj_update(s, o2, P).preference == WIN_A


def test_backup_absorbs():
    s = W(2, 1, WIN_A)
    k = Backup("b", "B", False)
    s2 = maj_update(s, k, P)
    assert s2 == Backup("A", "A", True)
    # backup pair runs the four-state rule
    k2 = maj_update(Backup("A", "A", False), Backup("B", "B", False), P)
    assert k2.b4 == "a"


def test_creation_flag_merges():
    s = W(1, 0, WIN_A, cc=True)
    o = W(1, 0, WIN_A, cc=False)
    assert maj_update(s, o, P).clock_creation is False


# --- potentials and certificates ---


def test_q_potential_single_worker():
    c = Counter({W(1, 1, WIN_A): 1})
    assert q_potential(c, 4) == 4


def test_q_potential_initial_matches_eps_n_squared():
    pop = initial_config(4, Fraction(1, 2), "A")
    assert q_potential(config_of(pop), 4) == 8  # eps * n^2


def test_q_potential_ignores_non_workers():
    c = Counter({Clock(0, WIN_A, "A", True): 3})
    assert q_potential(c, 8) == 0


def test_delta_weak():
    pop = initial_config(8, Fraction(1, 2), "A")
    c = config_of(pop)
    assert delta_weak(c) == -8
    c2 = Counter({W(1, 0, WIN_A): 2, W(1, 1, WIN_B, "B"): 1})
    assert delta_weak(c2) == 1


def test_stability_certificate():
    all_da = Counter({Terminator(WIN_A, "A", True): 4})
    assert stability_certificate(all_da) == WIN_A
    mixed = Counter({Terminator(WIN_A, "A", True): 3, W(1, 1, WIN_A): 1})
    assert stability_certificate(mixed) is None
    both = Counter(
        {Terminator(WIN_A, "A", True): 1, Terminator(WIN_B, "B", True): 1}
    )
    assert stability_certificate(both) is None
    backups = Counter({Backup("A", "A", False): 2, Backup("a", "B", False): 1})
    assert stability_certificate(backups) == WIN_A
    undecided = Counter({Backup("A", "A", False): 1, Backup("b", "B", False): 1})
    assert stability_certificate(undecided) is None


def test_odd_phase_values_are_zero_or_one_on_traces():
    params = MajorityParams.default(16)
    proto = majority.MajorityProtocol(params)
    pop = initial_config(16, Fraction(1, 4), "A")
    seen_half_in_odd = []

    def check(c):
        for s in c:
            if isinstance(s, Worker) and s.phase % 2 == 1 and s.value == HALF:
                seen_half_in_odd.append(s)
        return stability_certificate(c) is not None

    run_until(pop, proto, check, 200000, RngStream(5))
    assert not seen_half_in_odd


def test_small_run_certifies_correctly():
    params = MajorityParams.default(8)
    proto = majority.MajorityProtocol(params)
    for seed in range(20):
        pop = initial_config(8, Fraction(1, 2), "B")
        rep = run_until(
            pop, proto, lambda c: stability_certificate(c) is not None,
            10**6, RngStream(seed),
        )
        assert rep.interactions_to_certificate is not None
        assert stability_certificate(rep.final_config) == WIN_B
