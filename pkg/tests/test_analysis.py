from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from popproto import analysis, fourstate
from popproto.analysis import (
    CapExceededError,
    ConstructionError,
    DominanceReport,
    OrderingResult,
    ParseError,
    PreconditionError,
    TransitionSeq,
    Witness,
    canonical,
    export_trace,
    generate_ordering_instance,
    is_bottleneck,
    output_dominance_check,
    parse_f,
    parse_protocol,
    reachable,
    scan_bottlenecks,
    stable_decisions,
    suffix_ordering,
    validate_ordering,
)
from popproto.core import AgentPopulation, run_until
from popproto.rng import RngStream, derive_seed

FOUR = parse_protocol(fourstate.PROTOCOL_FILE)


# --- parser ---


def test_parse_four_state():
    assert FOUR.k == 4
    assert FOUR.inputs == frozenset({"A", "B"})
    # symmetric closure: 3 unordered rules -> 6 ordered non-trivial entries
    assert len(FOUR.delta) == 6
    assert FOUR.apply("A", "B") == ("a", "b")
    assert FOUR.apply("B", "A") == ("b", "a")
    assert FOUR.apply("a", "b") == ("a", "b")  # default no-op


def test_parse_unknown_state_reports_line():
    text = "state A output=X input\nrule A Z -> A A\n"
    with pytest.raises(ParseError) as e:
        parse_protocol(text)
    assert e.value.line == 2


def test_parse_duplicate_rule():
    text = (
        "state A output=X input\n"
        "rule A A -> A A\n"
        "rule A A -> A A\n"
    )
    with pytest.raises(ParseError) as e:
        parse_protocol(text)
    assert e.value.line == 3


def test_parse_requires_input_state():
    with pytest.raises(ParseError):
        parse_protocol("state A output=X\n")


def test_parse_empty_rule_section_is_all_noop():
    spec = parse_protocol("state A output=X input\n")
    assert spec.delta == {}
    assert reachable({"A": 3}, spec) == {canonical({"A": 3})}


def test_ordered_semantics_without_symmetric_directive():
    spec = parse_protocol(
        "state A output=X input\nstate C output=X\nrule A A -> C C\n"
        "state B output=X input\nrule A B -> C C\n"
    )
    assert spec.apply("A", "B") == ("C", "C")
    assert spec.apply("B", "A") == ("B", "A")  # mirror not implied


# --- reachability ---


def test_reachable_pinned_four_state_fixture():
    nodes = reachable({"A": 2, "B": 1}, FOUR)
    assert nodes == {
        canonical({"A": 2, "B": 1}),
        canonical({"A": 1, "a": 1, "b": 1}),
        canonical({"A": 1, "a": 2}),
    }


def test_reachable_single_agent():
    assert reachable({"A": 1}, FOUR) == {canonical({"A": 1})}


def test_reachable_cap_exceeded():
    with pytest.raises(CapExceededError):
        reachable({"A": 6, "B": 6}, FOUR, node_cap=3)


def test_reachable_agrees_with_depth_first_enumeration():
    def dfs(c0):
        seen = set()
        stack = [canonical(c0)]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            for _t, succ in analysis._applicable(node, FOUR):
                stack.append(succ)
        return seen

    for c0 in ({"A": 3, "B": 3}, {"A": 4, "B": 2}, {"A": 1, "B": 5}):
        assert reachable(c0, FOUR) == dfs(c0)


# --- stable decisions ---


def test_stable_decisions_majority_a():
    assert stable_decisions({"A": 3, "B": 1}, FOUR) == {"WIN_A"}


def test_stable_decisions_tie_is_empty():
    assert stable_decisions({"A": 1, "B": 1}, FOUR) == set()


def test_stable_decisions_noop_homogeneous():
    spec = parse_protocol("state A output=X input\n")
    assert stable_decisions({"A": 4}, spec) == {"X"}


def test_stable_decisions_monotone_under_reachability():
    base = {"A": 3, "B": 2}
    from_base = stable_decisions(base, FOUR)
    for node in reachable(base, FOUR):
        assert stable_decisions(dict(node), FOUR) <= from_base


# --- output dominance ---


def test_dominance_four_state_holds():
    assert output_dominance_check(FOUR, 5).holds


def test_dominance_single_state_vacuous():
    spec = parse_protocol("state A output=X input\n")
    assert output_dominance_check(spec, 3).holds


def test_dominance_fixture_fails_with_counterexample():
    spec = parse_protocol(analysis.DOMINANCE_FIXTURE)
    rep = output_dominance_check(spec, 3)
    assert not rep.holds
    c, cp, cpp = rep.counterexample
    assert c == canonical({"P": 1})
    assert cp == canonical({"P": 2})
    assert cpp == canonical({"Q": 2})


def test_dominance_report_invariant():
    with pytest.raises(ValueError):
        DominanceReport(holds=True, counterexample=(None, None, None))
    with pytest.raises(ValueError):
        DominanceReport(holds=False)


# --- bottlenecks ---


def test_is_bottleneck_examples():
    t = (("r1", "r2"), ("z1", "z2"))
    assert is_bottleneck(t, {"r1": 1, "r2": 1}, lambda n: 2)
    assert not is_bottleneck(t, {"r1": 3, "r2": 3}, lambda n: 2)
    assert is_bottleneck(t, {"r2": 5}, lambda n: 0)  # missing count is 0


@given(
    st.integers(0, 6), st.integers(0, 6),
    st.integers(0, 40), st.integers(0, 40),
)
def test_is_bottleneck_monotone_in_f(c1, c2, f1, f2):
    t = (("x", "y"), ("x", "x"))
    c = {"x": c1, "y": c2}
    lo, hi = sorted((f1, f2))
    if is_bottleneck(t, c, lambda n: lo):
        assert is_bottleneck(t, c, lambda n: hi)


def test_scan_bottlenecks():
    q = TransitionSeq(
        start={"A": 1, "B": 2, "a": 2},
        steps=[(("A", "B"), ("a", "b")), (("B", "a"), ("B", "b"))],
    )
    hits = scan_bottlenecks(q, lambda n: 2)
    assert hits == [(0, (("A", "B"), ("a", "b")))]
    assert scan_bottlenecks(TransitionSeq({"A": 2}, []), lambda n: 1) == []


def test_replay_rejects_negative_counts():
    q = TransitionSeq(start={"A": 1}, steps=[(("A", "A"), ("A", "A"))])
    with pytest.raises(ValueError):
        list(q.replay())


# --- suffix ordering ---


def _b0_instance():
    x = {"A": 4}
    steps = [(("A", "A"), ("X", "X")), (("A", "A"), ("X", "X"))]
    return x, TransitionSeq(start=x, steps=steps)


def test_ordering_b0_example():
    x, q = _b0_instance()
    res = suffix_ordering(x, {"X": 4}, q, 0, 2, "A")
    assert res.order == ("A",)
    assert res.witnesses[0].transition == (("A", "A"), ("X", "X"))
    assert validate_ordering(res, q, 0, {"X": 4})


def test_ordering_b1_fails_input_count():
    x, q = _b0_instance()
    with pytest.raises(PreconditionError) as e:
        suffix_ordering(x, {"X": 4}, q, 1, 2, "A")
    assert e.value.clause == "input-count"


def test_ordering_rejects_bad_replay():
    x, q = _b0_instance()
    with pytest.raises(PreconditionError) as e:
        suffix_ordering({"A": 6}, {"X": 4}, q, 0, 2, "A")
    assert e.value.clause == "replay"
    with pytest.raises(PreconditionError) as e:
        suffix_ordering(x, {"X": 3, "A": 1}, q, 0, 2, "A")
    assert e.value.clause == "replay"


def test_ordering_rejects_nonzero_final_a():
    x = {"A": 3}
    q = TransitionSeq(start=x, steps=[(("A", "A"), ("X", "X"))])
    with pytest.raises(PreconditionError) as e:
        suffix_ordering(x, {"X": 2, "A": 1}, q, 0, 2, "A")
    assert e.value.clause == "final-A-zero"


def test_ordering_rejects_bottlenecked_sequence():
    # the first step has input product 41*1 <= beta^2 = 144
    x = {"A": 41, "H": 1}
    steps = [(("A", "H"), ("X", "X"))] + [(("A", "A"), ("X", "X"))] * 20
    y = {"X": 42}
    q = TransitionSeq(start=x, steps=steps)
    with pytest.raises(PreconditionError) as e:
        suffix_ordering(x, y, q, 1, 3, "A")
    assert e.value.clause == "no-bottleneck"


def test_validator_rejects_low_witness_count():
    x, q = _b0_instance()
    res = suffix_ordering(x, {"X": 4}, q, 0, 2, "A")
    tampered = OrderingResult(
        order=res.order,
        witnesses=(Witness("A", "A", "X", "X", 0),),
        designated_A="A",
        b=res.b,
        delta_set=res.delta_set,
    )
    # counts are recomputed from q, so tampering with the stored count
    # alone is not enough; tamper with the transition instead
    bad = OrderingResult(
        order=res.order,
        witnesses=(Witness("A", "X", "X", "X", 5),),
        designated_A="A",
        b=res.b,
        delta_set=res.delta_set,
    )
    val = validate_ordering(bad, q, 1, {"X": 4})
    assert not val
    assert any("clause 2" in r for r in val.reasons)
    assert validate_ordering(tampered, q, 0, {"X": 4})


def test_validator_rejects_d_not_in_low_set():
    x, q = _b0_instance()
    res = suffix_ordering(x, {"X": 4}, q, 0, 2, "A")
    bad = OrderingResult(
        order=("X",),
        witnesses=(Witness("X", "A", "X", "X", 2),),
        designated_A="X",
        b=0,
        delta_set=res.delta_set,
    )
    val = validate_ordering(bad, q, 0, {"X": 4})
    assert not val
    assert any("clause 1" in r for r in val.reasons)


def test_validator_rejects_wrong_first_state():
    q = TransitionSeq(
        start={"A": 2, "B": 2},
        steps=[(("A", "A"), ("X", "X")), (("B", "B"), ("X", "X"))],
    )
    res = suffix_ordering(
        {"A": 2, "B": 2}, {"X": 4}, q, 0, 3, "A"
    )
    assert res.order[0] == "A"
    flipped = OrderingResult(
        order=tuple(reversed(res.order)),
        witnesses=tuple(reversed(res.witnesses)),
        designated_A="A",
        b=0,
        delta_set=res.delta_set,
    )
    val = validate_ordering(flipped, q, 0, {"X": 4})
    assert not val


def test_generated_instances_validate():
    rng = RngStream(derive_seed(12, 0))
    for _ in range(60):
        spec, x, q, b, k, a_state = generate_ordering_instance(rng)
        assert k <= 4 and sum(x.values()) <= 12
        res = suffix_ordering(x, dict(q.final()), q, b, k, a_state)
        val = validate_ordering(res, q, b, dict(q.final()))
        assert val, val.reasons


# --- trace export ---


def test_export_trace_round_trip():
    counts = fourstate.initial_counts(8, 2)
    agents = [s for s in fourstate.STATES for _ in range(counts[s])]
    pop = AgentPopulation(list(agents))
    rep = run_until(
        pop, fourstate.FourStateProtocol(),
        lambda c: fourstate.certificate(c) is not None,
        10**6, RngStream(13), record_trace=True,
    )
    seq = export_trace(rep.trace, agents)
    assert seq.final() == canonical(rep.final_config)
    assert scan_bottlenecks(seq, lambda n: 0) == []


def test_export_trace_requires_events():
    with pytest.raises(ValueError):
        export_trace(None, ["A", "B"])


def test_export_trace_empty():
    seq = export_trace([], ["A", "B"])
    assert seq.steps == []
    assert seq.final() == canonical({"A": 1, "B": 1})


# --- threshold expressions ---


def test_parse_f():
    assert parse_f("2")(10) == 2.0
    assert parse_f("n")(10) == 10.0
    assert parse_f("n/16")(64) == 4.0
    f = parse_f("2*log(n)")
    import math

    assert f(100) == pytest.approx(2 * math.log(100))
    assert parse_f("n*n/4")(6) == 9.0
    assert parse_f("(n/2)*log(n*n)")(4) == pytest.approx(2 * math.log(16))


def test_parse_f_rejects_garbage():
    for bad in ("n+1", "foo", "log(", "2 2", ""):
        with pytest.raises(ValueError):
            parse_f(bad)
