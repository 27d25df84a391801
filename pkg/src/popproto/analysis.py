"""Model checking and transition-sequence analysis on explicit protocols.

Works on count-vector configurations of a finite named-state protocol:
exhaustive reachability, stable-decision classification, the output
dominance property, bottleneck detection on replayed transition
sequences, and the constructive suffix transition ordering with an
independent validator.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .rng import RngStream


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CapExceededError(RuntimeError):
    pass


class PreconditionError(ValueError):
    """A named precondition of the ordering construction failed."""

    def __init__(self, clause: str, message: str):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


class ConstructionError(RuntimeError):
    """The ordering construction could not complete; this indicates an
    instance whose stated preconditions do not actually hold."""


Config = tuple[tuple[str, int], ...]


def canonical(counts) -> Config:
    return tuple(sorted((s, c) for s, c in dict(counts).items() if c > 0))


def config_size(c: Config) -> int:
    return sum(cnt for _, cnt in c)


@dataclass(frozen=True)
class ProtocolSpec:
    states: tuple[str, ...]
    inputs: frozenset
    delta: dict  # (s1, s2) -> (t1, t2), sparse; missing pairs are no-ops
    output: dict  # state -> output symbol

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("input state set must be non-empty")
        for s in self.states:
            if s not in self.output:
                raise ValueError(f"state {s} has no output symbol")

    @property
    def k(self) -> int:
        return len(self.states)

    def apply(self, s1: str, s2: str) -> tuple[str, str]:
        return self.delta.get((s1, s2), (s1, s2))

    def update(self, s: str, o: str, responder: bool) -> str:
        # one-sided view of the ordered-pair rule, for the generic driver
        if responder:
            return self.apply(o, s)[1]
        return self.apply(s, o)[0]


def parse_protocol(text: str) -> ProtocolSpec:
    states: list[str] = []
    inputs: set[str] = set()
    output: dict[str, str] = {}
    delta: dict[tuple[str, str], tuple[str, str]] = {}
    symmetric = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "state":
            if len(parts) < 3 or not parts[2].startswith("output="):
                raise ParseError(
                    "expected: state <name> output=<symbol> [input]", lineno
                )
            name = parts[1]
            if name in output:
                raise ParseError(f"duplicate state {name}", lineno)
            states.append(name)
            output[name] = parts[2][len("output="):]
            if not output[name]:
                raise ParseError(f"missing output symbol for {name}", lineno)
            rest = parts[3:]
            if rest == ["input"]:
                inputs.add(name)
            elif rest:
                raise ParseError(f"unexpected tokens {rest}", lineno)
        elif parts[0] == "symmetric":
            if len(parts) != 1:
                raise ParseError("symmetric takes no arguments", lineno)
            symmetric = True
        elif parts[0] == "rule":
            if len(parts) != 6 or parts[3] != "->":
                raise ParseError(
                    "expected: rule <s1> <s2> -> <t1> <t2>", lineno
                )
            s1, s2, t1, t2 = parts[1], parts[2], parts[4], parts[5]
            for name in (s1, s2, t1, t2):
                if name not in output:
                    raise ParseError(f"unknown state {name}", lineno)
            if (s1, s2) in delta:
                raise ParseError(f"duplicate rule for ({s1}, {s2})", lineno)
            delta[(s1, s2)] = (t1, t2)
            if symmetric and (s2, s1) != (s1, s2):
                if (s2, s1) in delta:
                    raise ParseError(
                        f"duplicate rule for mirrored pair ({s2}, {s1})", lineno
                    )
                delta[(s2, s1)] = (t2, t1)
        else:
            raise ParseError(f"unknown directive {parts[0]}", lineno)
    if not states:
        raise ParseError("no states declared", 1)
    if not inputs:
        raise ParseError("no input states declared", 1)
    # drop explicit no-ops so delta stays the sparse non-trivial map
    delta = {p: t for p, t in delta.items() if p != t}
    return ProtocolSpec(
        states=tuple(states), inputs=frozenset(inputs), delta=delta,
        output=output,
    )


def _applicable(c: Config, spec: ProtocolSpec):
    counts = dict(c)
    for (r1, r2), (z1, z2) in spec.delta.items():
        if r1 == r2:
            if counts.get(r1, 0) < 2:
                continue
        elif counts.get(r1, 0) < 1 or counts.get(r2, 0) < 1:
            continue
        nxt = dict(counts)
        nxt[r1] -= 1
        nxt[r2] = nxt.get(r2, 0) - 1
        nxt[z1] = nxt.get(z1, 0) + 1
        nxt[z2] = nxt.get(z2, 0) + 1
        yield ((r1, r2), (z1, z2)), canonical(nxt)


def _explore(c0, spec: ProtocolSpec, node_cap: int):
    start = canonical(c0)
    seen = {start}
    adj: dict[Config, list[Config]] = {}
    frontier = [start]
    while frontier:
        nxt_frontier = []
        for node in frontier:
            succs = []
            for _t, succ in _applicable(node, spec):
                succs.append(succ)
                if succ not in seen:
                    seen.add(succ)
                    if len(seen) > node_cap:
                        raise CapExceededError(
                            f"reachable set exceeds node cap {node_cap}"
                        )
                    nxt_frontier.append(succ)
            adj[node] = succs
        frontier = nxt_frontier
    return seen, adj


def reachable(c0, spec: ProtocolSpec, node_cap: int = 100000) -> set:
    if config_size(canonical(c0)) < 1:
        raise ValueError("configuration must be non-empty")
    nodes, _ = _explore(c0, spec, node_cap)
    return nodes


def _homogeneous_output(c: Config, spec: ProtocolSpec) -> Optional[str]:
    outs = {spec.output[s] for s, _ in c}
    return outs.pop() if len(outs) == 1 else None


def _tarjan_sccs(nodes, adj):
    """Iterative Tarjan; yields SCCs with all descendants emitted first."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                sccs.append(scc)
    return sccs


def _stable_map(c0, spec: ProtocolSpec, node_cap: int):
    """For every reachable configuration: its stable decision (or None),
    plus for each decision symbol a reachable stable configuration."""
    nodes, adj = _explore(c0, spec, node_cap)
    sccs = _tarjan_sccs(nodes, adj)
    scc_of = {}
    for idx, scc in enumerate(sccs):
        for node in scc:
            scc_of[node] = idx
    # descendants of an SCC come earlier in the Tarjan emission order
    outs: list[set] = []
    for idx, scc in enumerate(sccs):
        o = {_homogeneous_output(node, spec) for node in scc}
        for node in scc:
            for succ in adj.get(node, ()):  # noqa: B023
                si = scc_of[succ]
                if si != idx:
                    o |= outs[si]
        outs.append(o)
    decision = {}
    witnesses: dict[str, Config] = {}
    for node in nodes:
        o = outs[scc_of[node]]
        if len(o) == 1:
            d = next(iter(o))
            decision[node] = d
            if d is not None and d not in witnesses:
                witnesses[d] = node
        else:
            decision[node] = None
    return nodes, decision, witnesses


def stable_decisions(c0, spec: ProtocolSpec, node_cap: int = 100000) -> set:
    _, decision, witnesses = _stable_map(c0, spec, node_cap)
    return set(witnesses)


@dataclass(frozen=True)
class DominanceReport:
    holds: bool
    counterexample: Optional[tuple[Config, Config, Config]] = None

    def __post_init__(self):
        if self.holds == (self.counterexample is not None):
            raise ValueError("counterexample present iff the property fails")


def _multisets(states: list[str], size: int):
    if not states:
        if size == 0:
            yield ()
        return
    first, rest = states[0], states[1:]
    for c in range(size + 1):
        for tail in _multisets(rest, size - c):
            yield ((first, c),) + tail if c else tail


def output_dominance_check(
    spec: ProtocolSpec, n_max: int, node_cap: int = 100000
) -> DominanceReport:
    """Check that any configuration supported on a stable configuration's
    support can only stabilize to the same decision."""
    decisions_from: dict[Config, dict[str, Config]] = {}

    def reachable_decisions(c: Config) -> dict[str, Config]:
        if c not in decisions_from:
            _, _, witnesses = _stable_map(c, spec, node_cap)
            decisions_from[c] = witnesses
        return decisions_from[c]

    checked_supports = set()
    inputs = sorted(spec.inputs)
    for n in range(1, n_max + 1):
        for init in _multisets(inputs, n):
            if not init:
                continue
            _, decision, _ = _stable_map(init, spec, node_cap)
            for node, dec in decision.items():
                if dec is None:
                    continue
                support = tuple(sorted(s for s, _ in node))
                key = (support, dec)
                if key in checked_supports:
                    continue
                checked_supports.add(key)
                for size in range(1, n_max + 1):
                    for cprime in _multisets(list(support), size):
                        if not cprime:
                            continue
                        for dec2, cex in reachable_decisions(cprime).items():
                            if dec2 != dec:
                                return DominanceReport(
                                    holds=False,
                                    counterexample=(node, cprime, cex),
                                )
    return DominanceReport(holds=True)


# A protocol whose stable decision flips when the population doubles: a
# lone P is a stable WIN_A, while two Ps annihilate into a stable WIN_B.
DOMINANCE_FIXTURE = """\
state P output=WIN_A input
state Q output=WIN_B
symmetric
rule P P -> Q Q
"""


@dataclass
class TransitionSeq:
    start: dict
    steps: list  # of ((r1, r2), (z1, z2))

    def replay(self):
        """Yield configurations c0, c1, ... validating counts stay legal."""
        cur = Counter({s: c for s, c in self.start.items() if c > 0})
        yield canonical(cur)
        for idx, ((r1, r2), (z1, z2)) in enumerate(self.steps):
            if r1 == r2:
                if cur[r1] < 2:
                    raise ValueError(
                        f"step {idx}: needs two agents in {r1}, have {cur[r1]}"
                    )
            elif cur[r1] < 1 or cur[r2] < 1:
                raise ValueError(f"step {idx}: inputs ({r1}, {r2}) unavailable")
            cur[r1] -= 1
            cur[r2] -= 1
            cur[z1] += 1
            cur[z2] += 1
            yield canonical(cur)

    def final(self) -> Config:
        last = None
        for last in self.replay():
            pass
        return last


def is_bottleneck(t, c, f: Callable[[int], float]) -> bool:
    (r1, r2) = t[0]
    counts = dict(c) if not isinstance(c, dict) else c
    n = sum(v for v in counts.values())
    return counts.get(r1, 0) * counts.get(r2, 0) <= f(n)


def scan_bottlenecks(q: TransitionSeq, f: Callable[[int], float]) -> list:
    hits = []
    configs = q.replay()
    pre = next(configs)
    for idx, step in enumerate(q.steps):
        if is_bottleneck(step, dict(pre), f):
            hits.append((idx, step))
        pre = next(configs)
    return hits


@dataclass(frozen=True)
class Witness:
    d: str
    s: str
    o1: str
    o2: str
    count: int

    @property
    def transition(self):
        return ((self.d, self.s), (self.o1, self.o2))


@dataclass(frozen=True)
class OrderingResult:
    order: tuple[str, ...]
    witnesses: tuple[Witness, ...]
    designated_A: str
    b: int
    delta_set: frozenset


def _witness_occurrences(steps, w: Witness) -> int:
    fwd = ((w.d, w.s), (w.o1, w.o2))
    rev = ((w.s, w.d), (w.o2, w.o1))
    return sum(1 for st in steps if st == fwd or st == rev)


def suffix_ordering(
    x,
    y,
    q: TransitionSeq,
    b: int,
    k: int,
    designated_A: str,
) -> OrderingResult:
    """Constructive ordering of low-final-count states, built in reverse.

    For each remaining set of unordered low states, finds the last
    configuration where their total count is still at least the threshold,
    collects the suffix transitions that strictly shrink that total, and
    picks a sufficiently repeated type consuming one of them.
    """
    if b < 0:
        raise PreconditionError("threshold", "b must be non-negative")
    if k < 1:
        raise PreconditionError("state-count", "k must be positive")
    beta = k * k * b + k * b
    x = canonical(x)
    y = canonical(y)
    if canonical(q.start) != x:
        raise PreconditionError("replay", "sequence does not start at x")
    try:
        configs = list(q.replay())
    except ValueError as e:
        raise PreconditionError("replay", str(e)) from e
    if configs[-1] != y:
        raise PreconditionError("replay", "sequence does not end at y")
    xd, yd = dict(x), dict(y)
    if xd.get(designated_A, 0) < beta:
        raise PreconditionError(
            "input-count",
            f"x({designated_A}) = {xd.get(designated_A, 0)} < beta = {beta}",
        )
    if yd.get(designated_A, 0) != 0:
        raise PreconditionError(
            "final-A-zero", f"y({designated_A}) = {yd.get(designated_A, 0)} != 0"
        )
    hits = scan_bottlenecks(q, lambda n: beta * beta)
    if b > 0 and hits:
        idx, step = hits[0]
        raise PreconditionError(
            "no-bottleneck", f"step {idx} {step} is a beta^2-bottleneck"
        )
    states = {s for s, _ in x} | {s for s, _ in y}
    for (r1, r2), (z1, z2) in q.steps:
        states.update((r1, r2, z1, z2))
    delta_set = frozenset(d for d in states if yd.get(d, 0) <= b)
    if designated_A not in delta_set:
        raise PreconditionError(
            "final-A-zero", f"{designated_A} not in the low-count set"
        )
    threshold = max(beta, 1)
    remaining = set(delta_set)
    order_rev: list[str] = []
    witnesses_rev: list[Witness] = []
    while True:
        phi = [sum(cnt for s, cnt in c if s in remaining) for c in configs]
        last = max((i for i, v in enumerate(phi) if v >= threshold), default=None)
        if last is None:
            raise ConstructionError(
                "no configuration meets the count threshold; "
                "preconditions cannot actually hold"
            )
        counts: Counter = Counter()
        for i in range(last, len(q.steps)):
            if phi[i + 1] < phi[i]:
                counts[q.steps[i]] += 1
        candidates = []
        for step, cnt in counts.items():
            if cnt < max(b, 1):
                continue
            (r1, r2), (z1, z2) = step
            if z1 in remaining or z2 in remaining:
                continue
            for d, s, o1, o2 in ((r1, r2, z1, z2), (r2, r1, z2, z1)):
                if d in remaining and (s not in remaining or s == d):
                    candidates.append((cnt, Witness(d, s, o1, o2, cnt)))
                    break
        if not candidates:
            raise ConstructionError(
                "no repeated suffix transition consumes a low-count state; "
                "preconditions cannot actually hold"
            )
        candidates.sort(key=lambda t: (-t[0], t[1].transition))
        w = candidates[0][1]
        order_rev.append(w.d)
        witnesses_rev.append(w)
        remaining.discard(w.d)
        if w.d == designated_A:
            break
    order = tuple(reversed(order_rev))
    witnesses = tuple(reversed(witnesses_rev))
    # store whole-sequence occurrence counts for the report
    witnesses = tuple(
        Witness(w.d, w.s, w.o1, w.o2, _witness_occurrences(q.steps, w))
        for w in witnesses
    )
    return OrderingResult(
        order=order,
        witnesses=witnesses,
        designated_A=designated_A,
        b=b,
        delta_set=delta_set,
    )


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


def validate_ordering(
    res: OrderingResult, q: TransitionSeq, b: int, y
) -> ValidationResult:
    """Independent check of the ordering conclusions; recomputes the
    low-count set from y and recounts witness occurrences from q."""
    reasons = []
    yd = dict(canonical(y))
    states = {s for s, _ in canonical(q.start)} | set(yd)
    for (r1, r2), (z1, z2) in q.steps:
        states.update((r1, r2, z1, z2))
    delta = {d for d in states if yd.get(d, 0) <= b}
    order = list(res.order)
    if not order:
        reasons.append("empty ordering")
    elif order[0] != res.designated_A:
        reasons.append(f"d_1 = {order[0]} is not the designated input state")
    if len(set(order)) != len(order):
        reasons.append("ordering contains repeated states")
    if len(res.witnesses) != len(order):
        reasons.append("witness count does not match ordering length")
        return ValidationResult(False, tuple(reasons))
    for j, (d, w) in enumerate(zip(order, res.witnesses)):
        tag = f"j={j + 1}"
        if d not in delta:
            reasons.append(f"{tag}: clause 1 violated, {d} not a low-count state")
        if w.d != d:
            reasons.append(f"{tag}: witness does not consume {d}")
        occ = _witness_occurrences(q.steps, w)
        if occ < b:
            reasons.append(
                f"{tag}: clause 2 violated, witness occurs {occ} < b = {b} times"
            )
        later = set(order[j + 1:]) | {d}
        for role, st in (("s", w.s), ("o", w.o1), ("o'", w.o2)):
            if st in delta and st not in later:
                reasons.append(
                    f"{tag}: clause 3 violated, {role} = {st} is an unordered "
                    "low-count state"
                )
    return ValidationResult(not reasons, tuple(reasons))


def export_trace(trace, initial_states, state_name=str) -> TransitionSeq:
    """Bridge a recorded simulator trace to a TransitionSeq over state names."""
    if trace is None:
        raise ValueError("trace was not recorded with events")
    start = Counter(state_name(s) for s in initial_states)
    steps = []
    for ev in trace:
        if hasattr(ev, "before_pair"):
            (b1, b2), (a1, a2) = ev.before_pair, ev.after_pair
        else:
            _i, _j, b1, b2, a1, a2 = ev
        steps.append(
            (
                (state_name(b1), state_name(b2)),
                (state_name(a1), state_name(a2)),
            )
        )
    return TransitionSeq(start=dict(start), steps=steps)


def parse_f(expr: str) -> Callable[[int], float]:
    """Small expression language for bottleneck thresholds: numeric
    constants, n, log(n), products and quotients."""
    tokens = []
    i = 0
    text = expr.strip()
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "*/()":
            tokens.append(ch)
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append(("num", float(text[i:j])))
            i = j
        elif text[i:i + 3] == "log":
            tokens.append("log")
            i += 3
        elif ch == "n":
            tokens.append("n")
            i += 1
        else:
            raise ValueError(f"unexpected character {ch!r} in expression")

    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take(tok=None):
        t = peek()
        if t is None or (tok is not None and t != tok):
            raise ValueError(f"expected {tok!r}, found {t!r}")
        pos[0] += 1
        return t

    def factor():
        t = peek()
        if t == "(":
            take("(")
            e = expr_rule()
            take(")")
            return e
        if t == "log":
            take("log")
            take("(")
            e = expr_rule()
            take(")")
            return lambda n, e=e: math.log(e(n))
        if t == "n":
            take("n")
            return lambda n: float(n)
        if isinstance(t, tuple) and t[0] == "num":
            take()
            return lambda n, v=t[1]: v
        raise ValueError(f"unexpected token {t!r}")

    def expr_rule():
        left = factor()
        while peek() in ("*", "/"):
            op = take()
            right = factor()
            if op == "*":
                left = lambda n, a=left, b=right: a(n) * b(n)
            else:
                left = lambda n, a=left, b=right: a(n) / b(n)
        return left

    fn = expr_rule()
    if pos[0] != len(tokens):
        raise ValueError("trailing tokens in expression")
    return fn


def generate_ordering_instance(rng: RngStream):
    """Random small precondition-satisfying ordering instance.

    Chain protocols: low states C1..Cm are drained in phases, either one
    at a time against a regenerated partner, (Cj, P) -> (P, next), or in
    self-pairs (Cj, Cj) -> (next, T). All chain states end at count zero,
    so they form the low-count set for b = 0; every applied step has
    positive input counts, hence the sequence is trivially free of
    0-bottlenecks.

    Returns (spec, x, q, b, k, designated_A).
    """
    m = 1 + rng.randbelow(2)
    use_h = rng.randbelow(2) == 1
    chain = [f"C{i + 1}" for i in range(m)]
    states = chain + ["T"] + (["H"] if use_h else [])
    kinds = ["self" if rng.randbelow(2) else "partner" for _ in range(m)]
    halvings = sum(1 for kd in kinds if kd == "self")
    base = 1 + rng.randbelow(2)
    c1 = base << halvings
    partners = ["H" if use_h and rng.randbelow(2) else "T" for _ in range(m)]
    delta = {}
    rules_text = []
    for j, cj in enumerate(chain):
        nxt = chain[j + 1] if j + 1 < m else "T"
        if kinds[j] == "self":
            delta[(cj, cj)] = (nxt, "T")
            rules_text.append(f"rule {cj} {cj} -> {nxt} T")
        else:
            p = partners[j]
            delta[(cj, p)] = (p, nxt)
            delta[(p, cj)] = (nxt, p)
            rules_text.append(f"rule {cj} {p} -> {p} {nxt}")
    x = {chain[0]: c1, "T": 1}
    if use_h:
        x["H"] = 1
    cur = Counter(x)
    steps = []
    for j, cj in enumerate(chain):
        nxt = chain[j + 1] if j + 1 < m else "T"
        if kinds[j] == "self":
            for _ in range(cur[cj] // 2):
                steps.append(((cj, cj), (nxt, "T")))
            cur[nxt] += cur[cj] // 2
            cur["T"] += cur[cj] // 2
            cur[cj] = 0
        else:
            p = partners[j]
            for _ in range(cur[cj]):
                steps.append(((cj, p), (p, nxt)))
            cur[nxt] += cur[cj]
            cur[cj] = 0
    output = {s: ("OUT_LOW" if s in chain else "OUT_HIGH") for s in states}
    spec = ProtocolSpec(
        states=tuple(states),
        inputs=frozenset({chain[0]}),
        delta=delta,
        output=output,
    )
    q = TransitionSeq(start=dict(x), steps=steps)
    return spec, x, q, 0, len(states), chain[0]
