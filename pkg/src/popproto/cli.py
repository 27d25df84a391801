"""Command-line entry point.

Subcommands: `simulate` (one trial), `sweep` (seeded trial grids with
summary statistics), `analyze` (reachability / stable decisions /
dominance / bottlenecks / ordering on explicit protocols) and
`clock-gap` (phase-clock gap telemetry). Sweep and telemetry output is
CSV with a versioned header comment; analysis output is JSON. Identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import json
import math
import statistics
import sys
from fractions import Fraction

import click

from . import analysis, encoding, fourstate, kernels, leader, majority
from .core import AgentPopulation, parallel_time, run_until
from .phaseclock import ClockParams
from .rng import RngStream, derive_seed

# exit 2 is reserved for budget exhaustion; bad usage exits 64
click.UsageError.exit_code = 64

CSV_HEADER_COMMENT = "# popproto-csv v1"
TRACE_HEADER_COMMENT = "# popproto-trace v1"
CSV_COLUMNS = (
    "kind,protocol,n,epsilon,trial,seed,interactions_to_certificate,"
    "parallel_time,certificate_output,true_majority,invariant_violations,"
    "mean_pt,median_pt,p95_pt"
)

PROTOCOLS = ("majority", "leader-election", "four-state", "phase-clock-only")

EXIT_CERT = 0
EXIT_VIOLATION = 1
EXIT_BUDGET = 2


def _fail_usage(message: str):
    raise click.UsageError(message)


def _parse_epsilon(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        _fail_usage(f"cannot parse epsilon {text!r}")
    if not 0 < eps <= 1:
        _fail_usage("epsilon must be in (0, 1]")
    return eps


def _parse_init(text: str) -> dict:
    counts = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            _fail_usage(f"bad --init entry {part!r}, expected name:count")
        name, _, num = part.rpartition(":")
        try:
            cnt = int(num)
        except ValueError:
            _fail_usage(f"bad count in --init entry {part!r}")
        if cnt < 0:
            _fail_usage("counts must be non-negative")
        if cnt:
            counts[name] = counts.get(name, 0) + cnt
    if not counts:
        _fail_usage("--init must name at least one agent")
    return counts


def _default_budget(protocol: str, n: int, eps) -> int:
    """Interaction budget when --max-parallel-time is not given."""
    log2n = max(1, math.ceil(math.log2(n)))
    if protocol == "majority":
        rounds = math.ceil(math.log2(1 / float(eps))) + 1 if eps else 1
        return 64 * n * (log2n * rounds + 1)
    if protocol == "leader-election":
        return 64 * n * (log2n * log2n + 1)
    if protocol == "four-state":
        return math.ceil(40 * n * n * math.log(n))
    if protocol == "phase-clock-only":
        return math.ceil(200 * n * math.log(n))
    return 1000 * n


def _violations_field(violations) -> str:
    if not violations:
        return "none"
    return ";".join(f"{step}:{kind}" for step, kind in violations)


def _fmt_pt(steps, n) -> str:
    return str(parallel_time(steps, n)) if steps is not None else ""


class TrialRow:
    def __init__(
        self, protocol, n, epsilon, trial, seed, cert_step, cert_out,
        true_majority, violations,
    ):
        self.protocol = protocol
        self.n = n
        self.epsilon = epsilon
        self.trial = trial
        self.seed = seed
        self.cert_step = cert_step
        self.cert_out = cert_out
        self.true_majority = true_majority
        self.violations = violations

    def csv(self) -> str:
        return ",".join(
            [
                "trial",
                self.protocol,
                str(self.n),
                str(self.epsilon) if self.epsilon is not None else "",
                str(self.trial),
                str(self.seed),
                str(self.cert_step) if self.cert_step is not None else "",
                _fmt_pt(self.cert_step, self.n),
                self.cert_out or "none",
                self.true_majority or "none",
                _violations_field(self.violations),
                "", "", "",
            ]
        )


def _summary_row(protocol, n, epsilon, pts) -> str:
    if pts:
        vals = sorted(float(p) for p in pts)
        mean = statistics.fmean(vals)
        median = statistics.median(vals)
        p95 = vals[max(0, math.ceil(0.95 * len(vals)) - 1)]
        stats = [repr(mean), repr(median), repr(p95)]
    else:
        stats = ["", "", ""]
    return ",".join(
        [
            "summary", protocol, str(n),
            str(epsilon) if epsilon is not None else "",
            "", "", "", "", "", "", "",
        ]
        + stats
    )


def _run_trial(
    protocol, n, eps, seed, budget, check_level, rho_mult, tc_frac, beta,
    phases_mult, majority_side="A", record_trace=False,
):
    """One kernel trial; returns (TrialRow, raw run dict or report)."""
    if protocol == "majority":
        eps_n = int(eps * n)
        params = majority.MajorityParams.default(
            n, rho_mult=rho_mult, tc_frac=tc_frac, beta=beta
        )
        true = "WIN_A" if majority_side == "A" else "WIN_B"
        pop = majority.initial_config(n, eps, majority_side)
        if record_trace:
            proto = majority.MajorityProtocol(params)
            rep = run_until(
                pop, proto,
                lambda c: majority.stability_certificate(c) is not None,
                budget, RngStream(seed), record_trace=True,
            )
            cert_out = majority.stability_certificate(rep.final_config)
            row = TrialRow(
                protocol, n, eps, 0, seed, rep.interactions_to_certificate,
                cert_out, true, [],
            )
            return row, rep
        codes = [encoding.encode_maj(s) for s in pop.agents]
        res = kernels.maj_run(
            codes, params.clock.rho, params.clock.psi, params.clock.tc,
            params.m_phases, max(1, math.ceil(math.log2(n))), seed, budget,
            check_level=check_level,
            sample_every=n if check_level >= 2 else 0,
            eps_n=eps_n, majority_is_a=(majority_side == "A"),
        )
        row = TrialRow(
            protocol, n, eps, 0, seed, res["certificate_step"],
            res["certificate_output"], true, res["violations"],
        )
        return row, res
    if protocol == "leader-election":
        params = leader.LEParams.default(
            n, phases_mult=phases_mult, rho_mult=rho_mult, tc_frac=tc_frac,
            beta=beta,
        )
        pop = leader.le_initial(n)
        if record_trace:
            proto = leader.LeaderProtocol(params)
            rep = run_until(
                pop, proto, leader.le_certificate, budget, RngStream(seed),
                record_trace=True,
            )
            out = "LEADER" if leader.le_certificate(rep.final_config) else None
            row = TrialRow(
                protocol, n, None, 0, seed, rep.interactions_to_certificate,
                out, None, [],
            )
            return row, rep
        codes = [encoding.encode_le(s) for s in pop.agents]
        res = kernels.le_run(
            codes, params.clock.rho, params.clock.psi, params.clock.tc,
            params.m, seed, budget, check_level=check_level,
            sample_every=n if check_level >= 2 else 0,
        )
        row = TrialRow(
            protocol, n, None, 0, seed, res["certificate_step"],
            res["certificate_output"], None, res["violations"],
        )
        return row, res
    if protocol == "four-state":
        eps_n = int(eps * n)
        counts = fourstate.initial_counts(n, eps_n, majority_side)
        true = "WIN_A" if majority_side == "A" else "WIN_B"
        if record_trace:
            agents = [s for s in fourstate.STATES for _ in range(counts[s])]
            pop = AgentPopulation(agents)
            proto = fourstate.FourStateProtocol()
            rep = run_until(
                pop, proto,
                lambda c: fourstate.certificate(c) is not None,
                budget, RngStream(seed), record_trace=True,
            )
            out = fourstate.certificate(rep.final_config)
            row = TrialRow(
                protocol, n, eps, 0, seed, rep.interactions_to_certificate,
                out, true, [],
            )
            return row, rep
        codes = [
            encoding.encode_fourstate(s)
            for s in fourstate.STATES
            for _ in range(counts[s])
        ]
        res = kernels.fourstate_run(codes, seed, budget)
        row = TrialRow(
            protocol, n, eps, 0, seed, res["certificate_step"],
            res["certificate_output"], true, res["violations"],
        )
        return row, res
    raise AssertionError(protocol)


def _write_lines(out_path, lines):
    text = "\n".join(lines) + "\n"
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _write_trace(path, protocol_obj, pop0_names, trace):
    lines = [TRACE_HEADER_COMMENT]
    from collections import Counter

    for name, cnt in sorted(Counter(pop0_names).items()):
        lines.append(f"# start {cnt} {name}")
    lines.append("step,initiator,responder,before1,before2,after1,after2")
    for ev in trace:
        b1, b2 = ev.before_pair
        a1, a2 = ev.after_pair
        lines.append(
            ",".join(
                [
                    str(ev.step_index),
                    str(ev.initiator_index),
                    str(ev.responder_index),
                    protocol_obj.state_name(b1),
                    protocol_obj.state_name(b2),
                    protocol_obj.state_name(a1),
                    protocol_obj.state_name(a2),
                ]
            )
        )
    _write_lines(path, lines)


def read_trace_file(path) -> analysis.TransitionSeq:
    """Read a trace CSV back into a replayable transition sequence."""
    start = {}
    steps = []
    header_seen = False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("# start "):
                rest = line[len("# start "):]
                cnt_str, _, name = rest.partition(" ")
                start[name] = start.get(name, 0) + int(cnt_str)
                continue
            if line.startswith("#") or not line:
                continue
            if not header_seen:
                header_seen = True  # column header row
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ValueError(f"malformed trace row: {line!r}")
            _, _, _, b1, b2, a1, a2 = parts
            steps.append(((b1, b2), (a1, a2)))
    if not start:
        raise ValueError("trace file has no start-configuration comments")
    return analysis.TransitionSeq(start=start, steps=steps)


def _load_spec(file, builtin):
    if (file is None) == (builtin is None):
        _fail_usage("give exactly one of --file or --builtin")
    if builtin == "four-state":
        return analysis.parse_protocol(fourstate.PROTOCOL_FILE)
    if builtin == "dominance-fixture":
        return analysis.parse_protocol(analysis.DOMINANCE_FIXTURE)
    try:
        with open(file) as fh:
            text = fh.read()
    except OSError as e:
        _fail_usage(str(e))
    try:
        return analysis.parse_protocol(text)
    except analysis.ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_VIOLATION)


def _config_json(c) -> dict:
    return {s: cnt for s, cnt in analysis.canonical(c)}


def _emit_json(obj, out_path):
    _write_lines(out_path, [json.dumps(obj, indent=2, sort_keys=True)])


@click.group()
@click.version_option(package_name="popproto")
def main():
    """Population-protocol simulation and analysis."""


_common = [
    click.option("--n", "n_values", type=int, multiple=True, required=True),
    click.option("--epsilon", "eps_values", multiple=True,
                 help="initial discrepancy as a fraction, e.g. 1/4"),
    click.option("--rho-mult", type=float, default=8.0, show_default=True),
    click.option("--tc-frac", type=float, default=23 / 29, show_default=True),
    click.option("--beta", type=int, default=1, show_default=True),
    click.option("--phases-mult", type=float, default=8.0, show_default=True),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--max-parallel-time", type=float, default=None),
    click.option("--check", "check",
                 type=click.Choice(["none", "cheap", "full"]),
                 default="cheap", show_default=True),
    click.option("--majority-side", type=click.Choice(["A", "B"]),
                 default="A", show_default=True),
    click.option("--out", default="-", show_default=True,
                 help="output CSV path, - for stdout"),
]


def _add_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return wrap


def _validate_cell(protocol, n, eps):
    if n < 2:
        _fail_usage("--n must be at least 2")
    if protocol in ("majority", "four-state"):
        if eps is None:
            _fail_usage(f"--epsilon is required for {protocol}")
        eps_n = eps * n
        if eps_n.denominator != 1:
            _fail_usage(f"epsilon*n must be an integer (n={n}, eps={eps})")
        if (n - eps_n.numerator) % 2:
            _fail_usage(
                f"epsilon*n must have the same parity as n (n={n}, eps={eps})"
            )
        if eps_n.numerator < 1:
            _fail_usage("epsilon*n must be at least 1")


@main.command()
@click.option("--protocol", required=True,
              type=click.Choice(PROTOCOLS + ("file",)))
@click.option("--file", "proto_file", default=None,
              help="protocol description file (with --protocol file)")
@click.option("--init", "init_text", default=None,
              help="initial configuration name:count,... (file protocols)")
@click.option("--trace", "trace_path", default=None,
              help="record and write the interaction trace CSV here")
@_add_options(_common)
def simulate(
    protocol, proto_file, init_text, trace_path, n_values, eps_values,
    rho_mult, tc_frac, beta, phases_mult, seed, max_parallel_time, check,
    majority_side, out,
):
    """Run a single trial; exit 0 on certificate, 2 on budget exhaustion,
    1 on invariant violation."""
    if len(n_values) != 1:
        _fail_usage("simulate takes exactly one --n")
    if len(eps_values) > 1:
        _fail_usage("simulate takes at most one --epsilon")
    n = n_values[0]
    eps = _parse_epsilon(eps_values[0]) if eps_values else None
    check_level = {"none": 0, "cheap": 1, "full": 2}[check]

    if protocol == "file":
        if proto_file is None:
            _fail_usage("--protocol file requires --file")
        if init_text is None:
            _fail_usage("--protocol file requires --init")
        spec = _load_spec(proto_file, None)
        counts = _parse_init(init_text)
        for name in counts:
            if name not in spec.output:
                _fail_usage(f"--init names unknown state {name}")
        if sum(counts.values()) != n:
            _fail_usage("--init counts must sum to --n")
        agents = [s for s in sorted(counts) for _ in range(counts[s])]
        names0 = list(agents)
        pop = AgentPopulation(agents)

        class _FileProto:
            update = staticmethod(spec.update)
            state_name = staticmethod(str)
            output = staticmethod(lambda s: spec.output[s])

        def silent(c):
            return not any(True for _ in analysis._applicable(
                analysis.canonical(c), spec
            ))

        budget = (
            int(max_parallel_time * n)
            if max_parallel_time is not None
            else _default_budget("file", n, eps)
        )
        rep = run_until(
            pop, _FileProto(), silent, budget, RngStream(seed),
            record_trace=trace_path is not None,
        )
        outs = {spec.output[s] for s in rep.final_config}
        cert_out = outs.pop() if len(outs) == 1 else None
        row = TrialRow(
            f"file:{proto_file}", n, None, 0, seed,
            rep.interactions_to_certificate,
            cert_out if rep.interactions_to_certificate is not None else None,
            None, [],
        )
        _write_lines(out, [CSV_HEADER_COMMENT, CSV_COLUMNS, row.csv()])
        if trace_path is not None:
            _write_trace(trace_path, _FileProto(), names0, rep.trace)
        sys.exit(
            EXIT_CERT
            if rep.interactions_to_certificate is not None
            else EXIT_BUDGET
        )

    if protocol == "phase-clock-only":
        budget = (
            int(max_parallel_time * n)
            if max_parallel_time is not None
            else _default_budget(protocol, n, eps)
        )
        p = ClockParams.for_population(n, rho_mult=rho_mult, tc_frac=tc_frac)
        res = kernels.clock_run(
            n, p.rho, seed, budget, sample_every=0, alpha=p.alpha,
            stop_on_violation=True,
        )
        violations = (
            [(res["violation_step"], "gap")]
            if res["violation_step"] >= 0
            else []
        )
        row = TrialRow(
            protocol, n, None, 0, seed, None, None, None, violations
        )
        _write_lines(out, [CSV_HEADER_COMMENT, CSV_COLUMNS, row.csv()])
        sys.exit(EXIT_VIOLATION if violations else EXIT_CERT)

    _validate_cell(protocol, n, eps)
    budget = (
        int(max_parallel_time * n)
        if max_parallel_time is not None
        else _default_budget(protocol, n, eps)
    )
    row, raw = _run_trial(
        protocol, n, eps, seed, budget, check_level, rho_mult, tc_frac,
        beta, phases_mult, majority_side, record_trace=trace_path is not None,
    )
    _write_lines(out, [CSV_HEADER_COMMENT, CSV_COLUMNS, row.csv()])
    if trace_path is not None:
        if protocol == "majority":
            proto = majority.MajorityProtocol(
                majority.MajorityParams.default(
                    n, rho_mult=rho_mult, tc_frac=tc_frac, beta=beta
                )
            )
        elif protocol == "leader-election":
            proto = leader.LeaderProtocol(
                leader.LEParams.default(
                    n, phases_mult=phases_mult, rho_mult=rho_mult,
                    tc_frac=tc_frac, beta=beta,
                )
            )
        else:
            proto = fourstate.FourStateProtocol()
        names0 = _initial_names(protocol, n, eps, majority_side, proto)
        _write_trace(trace_path, proto, names0, raw.trace)
    if row.violations:
        click.echo(
            json.dumps(
                {
                    "violation": [
                        {"step": s, "kind": k} for s, k in row.violations
                    ],
                    "protocol": protocol, "n": n, "seed": seed,
                },
                sort_keys=True,
            ),
            err=True,
        )
        sys.exit(EXIT_VIOLATION)
    sys.exit(EXIT_CERT if row.cert_step is not None else EXIT_BUDGET)


def _initial_names(protocol, n, eps, majority_side, proto):
    if protocol == "majority":
        pop = majority.initial_config(n, eps, majority_side)
        return [proto.state_name(s) for s in pop.agents]
    if protocol == "leader-election":
        pop = leader.le_initial(n)
        return [proto.state_name(s) for s in pop.agents]
    counts = fourstate.initial_counts(n, int(eps * n), majority_side)
    return [s for s in fourstate.STATES for _ in range(counts[s])]


@main.command()
@click.option("--protocol", required=True, type=click.Choice(PROTOCOLS[:3]))
@click.option("--trials", type=int, default=1, show_default=True)
@_add_options(_common)
def sweep(
    protocol, trials, n_values, eps_values, rho_mult, tc_frac, beta,
    phases_mult, seed, max_parallel_time, check, majority_side, out,
):
    """Run a seeded trial grid; trial rows then per-cell summary rows."""
    if trials < 1:
        _fail_usage("--trials must be at least 1")
    eps_list = (
        [_parse_epsilon(e) for e in eps_values] if eps_values else [None]
    )
    check_level = {"none": 0, "cheap": 1, "full": 2}[check]
    cells = []
    for n in sorted(n_values):
        for eps in eps_list:
            _validate_cell(protocol, n, eps)
            cells.append((n, eps))
    lines = [CSV_HEADER_COMMENT, CSV_COLUMNS]
    summaries = []
    index = 0
    violation_record = None
    for n, eps in cells:
        budget = (
            int(max_parallel_time * n)
            if max_parallel_time is not None
            else _default_budget(protocol, n, eps)
        )
        pts = []
        for t in range(trials):
            trial_seed = derive_seed(seed, index)
            index += 1
            row, _ = _run_trial(
                protocol, n, eps, trial_seed, budget, check_level,
                rho_mult, tc_frac, beta, phases_mult, majority_side,
            )
            row.trial = t
            lines.append(row.csv())
            if row.cert_step is not None:
                pts.append(parallel_time(row.cert_step, n))
            if row.violations and violation_record is None:
                violation_record = {
                    "violation": [
                        {"step": s, "kind": k} for s, k in row.violations
                    ],
                    "protocol": protocol, "n": n, "trial": t,
                    "seed": trial_seed,
                }
                break
        summaries.append(_summary_row(protocol, n, eps, pts))
        if violation_record is not None:
            break
    lines.extend(summaries)
    _write_lines(out, lines)
    if violation_record is not None:
        click.echo(json.dumps(violation_record, sort_keys=True), err=True)
        sys.exit(EXIT_VIOLATION)
    sys.exit(EXIT_CERT)


@main.command(name="clock-gap")
@click.option("--n", type=int, required=True)
@click.option("--rho-mult", type=float, default=8.0, show_default=True)
@click.option("--alpha", type=float, default=0.25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-parallel-time", type=float, default=None)
@click.option("--sample-every", type=int, default=None,
              help="telemetry sampling period in interactions [default: n]")
@click.option("--out", default="-", show_default=True)
def clock_gap(n, rho_mult, alpha, seed, max_parallel_time, sample_every, out):
    """Phase-clock gap telemetry: CSV rows interaction,gap,gamma."""
    if n < 2:
        _fail_usage("--n must be at least 2")
    p = ClockParams.for_population(n, rho_mult=rho_mult, alpha=alpha)
    budget = (
        int(max_parallel_time * n)
        if max_parallel_time is not None
        else _default_budget("phase-clock-only", n, None)
    )
    period = sample_every if sample_every is not None else n
    if period < 1:
        _fail_usage("--sample-every must be positive")
    res = kernels.clock_run(
        n, p.rho, seed, budget, sample_every=period, alpha=alpha,
        stop_on_violation=False,
    )
    lines = [CSV_HEADER_COMMENT, f"# rho={p.rho} n={n} seed={seed}"]
    lines.append("interaction,gap,gamma")
    for step, g, gamma in res["samples"]:
        lines.append(f"{step},{g},{gamma!r}")
    lines.append(f"# max_gap={res['max_gap']}")
    lines.append(f"# violation_step={res['violation_step']}")
    _write_lines(out, lines)
    sys.exit(EXIT_CERT)


@main.group()
def analyze():
    """Model checking on explicit protocol descriptions."""


_spec_opts = [
    click.option("--file", "file", default=None,
                 help="protocol description file"),
    click.option("--builtin", default=None,
                 type=click.Choice(["four-state", "dominance-fixture"])),
    click.option("--node-cap", type=int, default=100000, show_default=True),
    click.option("--out", default="-", show_default=True),
]


@analyze.command()
@click.option("--init", "init_text", required=True)
@_add_options(_spec_opts)
def reach(init_text, file, builtin, node_cap, out):
    """Enumerate the reachable configurations from --init."""
    spec = _load_spec(file, builtin)
    c0 = _parse_init(init_text)
    for name in c0:
        if name not in spec.output:
            _fail_usage(f"--init names unknown state {name}")
    try:
        nodes = analysis.reachable(c0, spec, node_cap=node_cap)
    except analysis.CapExceededError as e:
        click.echo(f"cap exceeded: {e}", err=True)
        sys.exit(EXIT_VIOLATION)
    report = {
        "count": len(nodes),
        "configurations": [_config_json(c) for c in sorted(nodes)],
    }
    _emit_json(report, out)


@analyze.command()
@click.option("--init", "init_text", required=True)
@_add_options(_spec_opts)
def decisions(init_text, file, builtin, node_cap, out):
    """Stable decisions reachable from --init."""
    spec = _load_spec(file, builtin)
    c0 = _parse_init(init_text)
    for name in c0:
        if name not in spec.output:
            _fail_usage(f"--init names unknown state {name}")
    try:
        decs = analysis.stable_decisions(c0, spec, node_cap=node_cap)
    except analysis.CapExceededError as e:
        click.echo(f"cap exceeded: {e}", err=True)
        sys.exit(EXIT_VIOLATION)
    _emit_json({"stable_decisions": sorted(decs)}, out)


@analyze.command()
@click.option("--n-max", type=int, default=5, show_default=True)
@_add_options(_spec_opts)
def dominance(n_max, file, builtin, node_cap, out):
    """Exhaustive output-dominance check up to population size --n-max."""
    spec = _load_spec(file, builtin)
    if n_max < 1:
        _fail_usage("--n-max must be positive")
    try:
        rep = analysis.output_dominance_check(spec, n_max, node_cap=node_cap)
    except analysis.CapExceededError as e:
        click.echo(f"cap exceeded: {e}", err=True)
        sys.exit(EXIT_VIOLATION)
    report = {"holds": rep.holds, "n_max": n_max}
    if rep.counterexample is not None:
        c, cp, cpp = rep.counterexample
        report["counterexample"] = {
            "stable": _config_json(c),
            "same_support": _config_json(cp),
            "other_decision_stable": _config_json(cpp),
        }
    else:
        report["counterexample"] = None
    _emit_json(report, out)


@analyze.command()
@click.option("--trace", "trace_path", required=True,
              help="trace CSV produced by simulate --trace")
@click.option("-f", "--threshold", "f_expr", required=True,
              help="threshold expression over n, e.g. 'n/16' or '2*log(n)'")
@click.option("--out", default="-", show_default=True)
def bottlenecks(trace_path, f_expr, out):
    """Scan a replayed trace for f-bottleneck steps."""
    try:
        fn = analysis.parse_f(f_expr)
    except ValueError as e:
        _fail_usage(str(e))
    try:
        seq = read_trace_file(trace_path)
        hits = analysis.scan_bottlenecks(seq, fn)
    except (OSError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_VIOLATION)
    report = {
        "steps": len(seq.steps),
        "threshold": f_expr,
        "bottlenecks": [
            {"index": idx, "inputs": list(t[0]), "outputs": list(t[1])}
            for idx, t in hits
        ],
    }
    _emit_json(report, out)


@analyze.command()
@click.option("--generate", "count", type=int, default=None,
              help="generate this many random instances and validate each")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trace", "trace_path", default=None,
              help="trace CSV to analyze instead of generated instances")
@click.option("--b", "b_val", type=int, default=0, show_default=True)
@click.option("--k", "k_val", type=int, default=None,
              help="state count (defaults to states seen in the trace)")
@click.option("--input-state", "designated", default=None)
@click.option("--out", default="-", show_default=True)
def ordering(count, seed, trace_path, b_val, k_val, designated, out):
    """Suffix transition ordering: construct and independently validate."""
    if (count is None) == (trace_path is None):
        _fail_usage("give exactly one of --generate or --trace")
    if count is not None:
        if count < 1:
            _fail_usage("--generate must be positive")
        rng = RngStream(derive_seed(seed, 0))
        results = []
        accepted = 0
        for idx in range(count):
            spec, x, q, b, k, a_state = analysis.generate_ordering_instance(
                rng
            )
            res = analysis.suffix_ordering(x, dict(q.final()), q, b, k, a_state)
            val = analysis.validate_ordering(res, q, b, dict(q.final()))
            accepted += bool(val)
            results.append(
                {
                    "instance": idx,
                    "k": k,
                    "n": sum(x.values()),
                    "order": list(res.order),
                    "witnesses": [
                        {
                            "d": w.d, "s": w.s, "o1": w.o1, "o2": w.o2,
                            "count": w.count,
                        }
                        for w in res.witnesses
                    ],
                    "validated": bool(val),
                    "reasons": list(val.reasons),
                }
            )
        _emit_json(
            {"instances": count, "accepted": accepted, "results": results},
            out,
        )
        sys.exit(EXIT_CERT if accepted == count else EXIT_VIOLATION)
    if designated is None:
        _fail_usage("--trace mode requires --input-state")
    try:
        seq = read_trace_file(trace_path)
    except (OSError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_VIOLATION)
    y = dict(seq.final())
    states = set(seq.start) | set(y)
    for (r1, r2), (z1, z2) in seq.steps:
        states.update((r1, r2, z1, z2))
    k = k_val if k_val is not None else len(states)
    try:
        res = analysis.suffix_ordering(
            dict(seq.start), y, seq, b_val, k, designated
        )
    except analysis.PreconditionError as e:
        _emit_json({"error": "precondition", "clause": e.clause,
                    "message": str(e)}, out)
        sys.exit(EXIT_VIOLATION)
    except analysis.ConstructionError as e:
        _emit_json({"error": "construction", "message": str(e)}, out)
        sys.exit(EXIT_VIOLATION)
    val = analysis.validate_ordering(res, seq, b_val, y)
    _emit_json(
        {
            "order": list(res.order),
            "designated_input": res.designated_A,
            "b": res.b,
            "low_count_states": sorted(res.delta_set),
            "witnesses": [
                {"d": w.d, "s": w.s, "o1": w.o1, "o2": w.o2, "count": w.count}
                for w in res.witnesses
            ],
            "validated": bool(val),
            "reasons": list(val.reasons),
        },
        out,
    )
    sys.exit(EXIT_CERT if val else EXIT_VIOLATION)


if __name__ == "__main__":
    main()
