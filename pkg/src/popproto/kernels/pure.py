"""Pure-Python simulation kernels over packed integer agent states.

These run the hot interaction loops with O(1) bookkeeping per step:
certificate counters, monotone-flag checks, clock-count cap, the signed
worker potential (kept in half-units so it stays an exact integer) and
the weak-worker balance. A compiled extension with identical semantics
and identical random streams replaces this module when available.

Majority state encoding (one int per agent):
  bits 0-1  role tag: 0 worker, 1 clock, 2 backup, 3 terminator
  bit  2    initial input was B
  bit  3    clock-creation flag
  bits 4-5  worker value in half-units (0, 1, 2) or backup sub-state index
  bit  6    preference is WIN_B (also the terminator's decision)
  bits 8+   worker phase or clock position

Leader-election encoding:
  bits 0-1  role tag: 0 contender, 1 follower, 2 clock
  bit  2    coin
  bit  3    clock-creation flag
  bit  4    created
  bit  5    intermediate
  bit  6    indicator is High
  bits 8+   contender phase, follower best phase, or clock position
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Majority encoding.
TAG_WORKER, TAG_CLOCK, TAG_BACKUP, TAG_TERM = 0, 1, 2, 3
F_INITB = 1 << 2
F_CC = 1 << 3
VAL_SHIFT = 4
VAL_MASK = 3 << 4
F_PREFB = 1 << 6
NUM_SHIFT = 8

# Four-state sub-protocol: 0=A, 1=B, 2=a, 3=b; row*4+col -> new row state.
FOUR_RULE = (
    0, 2, 0, 0,
    3, 1, 1, 1,
    2, 3, 2, 2,
    2, 3, 3, 3,
)

# Leader-election encoding.
LE_CONT, LE_FOLL, LE_CLOCK = 0, 1, 2
LF_COIN = 1 << 2
LF_CC = 1 << 3
LF_CREATED = 1 << 4
LF_INTER = 1 << 5
LF_HIGH = 1 << 6


def _mix(z):
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def rng_next(state):
    """One splitmix64 draw; returns (value, new_state)."""
    state = (state + _GOLDEN) & MASK64
    return _mix(state), state


def rng_randbelow(state, bound):
    """Rejection-sampled uniform in [0, bound); returns (value, new_state)."""
    rem = (1 << 64) % bound
    limit = MASK64 - rem
    while True:
        z, state = rng_next(state)
        if z <= limit:
            return z % bound, state


def _pair(state, n):
    i, state = rng_randbelow(state, n)
    j, state = rng_randbelow(state, n - 1)
    if j >= i:
        j += 1
    return i, j, state


def maj_update_code(s, o, responder, rho, psi, tc, m):
    """One-sided phased-majority update on packed states."""
    st = s & 3
    ot = o & 3
    if st == TAG_BACKUP or ot == TAG_BACKUP:
        if st == TAG_BACKUP and ot == TAG_BACKUP:
            nb = FOUR_RULE[((s >> VAL_SHIFT) & 3) * 4 + ((o >> VAL_SHIFT) & 3)]
            return (s & ~VAL_MASK) | (nb << VAL_SHIFT)
        if ot == TAG_BACKUP:
            return TAG_BACKUP | (s & (F_INITB | F_CC)) | (
                (1 << VAL_SHIFT) if s & F_INITB else 0
            )
        return s
    if st == TAG_TERM or ot == TAG_TERM:
        if (s ^ o) & F_PREFB:
            return TAG_BACKUP | (s & (F_INITB | F_CC)) | (
                (1 << VAL_SHIFT) if s & F_INITB else 0
            )
        return TAG_TERM | (s & (F_INITB | F_CC | F_PREFB))
    # Both workers or clocks.
    cc = F_CC if (s & F_CC) and (o & F_CC) else 0
    prefb = s & F_PREFB
    if (st != TAG_WORKER or not (s & VAL_MASK)) and (
        ot == TAG_WORKER and (o & VAL_MASK)
    ):
        prefb = o & F_PREFB
    initb = s & F_INITB
    if st == TAG_CLOCK:
        pos = s >> NUM_SHIFT
        if ot == TAG_CLOCK:
            op = o >> NUM_SHIFT
            lo, hi = (pos, op) if pos <= op else (op, pos)
            if lo < rho and hi >= psi - rho:
                if pos == hi:
                    pos += 1
                    if pos == psi:
                        pos = 0
            else:
                d = hi - lo
                circ = d if 2 * d <= psi else psi - d
                if circ >= rho:
                    return TAG_BACKUP | initb | cc | (
                        (1 << VAL_SHIFT) if initb else 0
                    )
                if pos < op or (pos == op and responder):
                    pos += 1
                    if pos == psi:
                        pos = 0
            if (s >> NUM_SHIFT) >= tc:
                cc = 0
        return TAG_CLOCK | initb | cc | prefb | (pos << NUM_SHIFT)
    # S is a worker; O is a worker or a clock.
    phi = s >> NUM_SHIFT
    if ot == TAG_CLOCK:
        op = o >> NUM_SHIFT
        lbl = 1 if op < rho else (0 if 2 * rho <= op < 3 * rho else -1)
        inc = lbl >= 0 and (phi & 1) == 1 - lbl
    else:
        inc = phi == (o >> NUM_SHIFT) - 1
    if inc:
        vh = (s >> VAL_SHIFT) & 3
        if phi == m or ((phi & 1) == 0 and vh == 2):
            return TAG_TERM | initb | cc | (s & F_PREFB)
        if (phi & 1) == 0 and vh == 1:
            vh = 2
        return (
            TAG_WORKER | initb | cc | prefb | (vh << VAL_SHIFT)
            | ((phi + 1) << NUM_SHIFT)
        )
    if ot == TAG_CLOCK:
        return TAG_WORKER | initb | cc | prefb | (s & VAL_MASK) | (phi << NUM_SHIFT)
    oph = o >> NUM_SHIFT
    dph = phi - oph
    if dph > 1 or dph < -1:
        return TAG_BACKUP | initb | cc | ((1 << VAL_SHIFT) if initb else 0)
    if dph != 0:
        return TAG_WORKER | initb | cc | prefb | (s & VAL_MASK) | (phi << NUM_SHIFT)
    vh = (s >> VAL_SHIFT) & 3
    ovh = (o >> VAL_SHIFT) & 3
    if phi & 1:
        # Cancellation phase.
        if vh == 2 and ovh == 2 and (s ^ o) & F_PREFB:
            if cc and not (s & F_PREFB):
                return TAG_CLOCK | initb | cc  # position 0, preference WIN_A
            vh = 0
    else:
        # Doubling phase.
        if vh + ovh == 2:
            vh = 1
    return TAG_WORKER | initb | cc | prefb | (vh << VAL_SHIFT) | (phi << NUM_SHIFT)


def _maj_cert(n, term_a, term_b, backups, b4):
    if term_a == n:
        return "WIN_A"
    if term_b == n:
        return "WIN_B"
    if backups == n:
        if b4[1] == 0 and b4[3] == 0:
            return "WIN_A"
        if b4[0] == 0 and b4[2] == 0:
            return "WIN_B"
    return None


_LEGAL_MAJ_TAG = {
    (TAG_WORKER, TAG_WORKER), (TAG_WORKER, TAG_CLOCK),
    (TAG_WORKER, TAG_BACKUP), (TAG_WORKER, TAG_TERM),
    (TAG_CLOCK, TAG_CLOCK), (TAG_CLOCK, TAG_BACKUP), (TAG_CLOCK, TAG_TERM),
    (TAG_BACKUP, TAG_BACKUP),
    (TAG_TERM, TAG_TERM), (TAG_TERM, TAG_BACKUP),
}


def maj_run(
    codes,
    rho,
    psi,
    tc,
    m,
    big_l,
    seed,
    max_interactions,
    check_level=1,
    sample_every=0,
    eps_n=0,
    majority_is_a=True,
    record_trace=False,
):
    """Run phased majority to its certificate or the interaction budget.

    Returns a dict with the certificate step/output, violations (the run
    stops on the first one), telemetry samples, prefix-event markers and
    the final packed states.
    """
    a = list(codes)
    n = len(a)
    term_a = term_b = backups = clocks = 0
    b4 = [0, 0, 0, 0]
    w_v0 = w_v2 = 0
    q2 = 0
    for c in a:
        tg = c & 3
        if tg == TAG_WORKER:
            vh = (c >> VAL_SHIFT) & 3
            if vh == 0:
                w_v0 += 1
            elif vh == 2:
                w_v2 += 1
            q = vh << (big_l - ((c >> NUM_SHIFT) - 1) // 2)
            q2 += -q if c & F_PREFB else q
        elif tg == TAG_CLOCK:
            clocks += 1
        elif tg == TAG_BACKUP:
            backups += 1
            b4[(c >> VAL_SHIFT) & 3] += 1
        else:
            if c & F_PREFB:
                term_b += 1
            else:
                term_a += 1
    violations = []
    samples = []
    trace = [] if record_trace else None
    first_backup = -1
    first_maj_term = -1
    state = seed & MASK64
    steps = 0

    def scan_stats():
        strong_a = strong_b = 0
        pmin = -1
        pmax = -1
        for c in a:
            if (c & 3) == TAG_WORKER:
                ph = c >> NUM_SHIFT
                if pmin < 0 or ph < pmin:
                    pmin = ph
                if ph > pmax:
                    pmax = ph
                if (c >> VAL_SHIFT) & 3:
                    if c & F_PREFB:
                        strong_b += 1
                    else:
                        strong_a += 1
        return strong_a, strong_b, pmin, pmax

    def sample_point():
        rec = {
            "step": steps, "q2": q2, "delta": w_v0 - w_v2,
            "clocks": clocks, "backups": backups,
            "term_a": term_a, "term_b": term_b,
        }
        sa, sb, pmin, pmax = scan_stats()
        rec.update(strong_a=sa, strong_b=sb, min_phase=pmin, max_phase=pmax)
        samples.append(rec)
        maj_term = term_a if majority_is_a else term_b
        if eps_n > 0 and backups == 0 and maj_term == 0:
            bound = 2 * eps_n * n
            ok = q2 >= bound if majority_is_a else q2 <= -bound
            if not ok:
                violations.append((steps, "q_invariant"))

    if check_level >= 2 and sample_every > 0:
        sample_point()
    cert = _maj_cert(n, term_a, term_b, backups, b4)
    while cert is None and not violations and steps < max_interactions:
        i, j, state = _pair(state, n)
        s = a[i]
        o = a[j]
        ns = maj_update_code(s, o, False, rho, psi, tc, m)
        no = maj_update_code(o, s, True, rho, psi, tc, m)
        steps += 1
        if ns != s or no != o:
            if record_trace:
                trace.append((i, j, s, o, ns, no))
            pre_backups = backups
            pre_terms = term_a + term_b
            pre_delta = w_v0 - w_v2
            entered_odd = False
            for old, new in ((s, ns), (o, no)):
                tg = old & 3
                ntg = new & 3
                if tg == TAG_WORKER:
                    vh = (old >> VAL_SHIFT) & 3
                    if vh == 0:
                        w_v0 -= 1
                    elif vh == 2:
                        w_v2 -= 1
                    q = vh << (big_l - ((old >> NUM_SHIFT) - 1) // 2)
                    q2 -= -q if old & F_PREFB else q
                elif tg == TAG_CLOCK:
                    clocks -= 1
                elif tg == TAG_BACKUP:
                    backups -= 1
                    b4[(old >> VAL_SHIFT) & 3] -= 1
                elif old & F_PREFB:
                    term_b -= 1
                else:
                    term_a -= 1
                if ntg == TAG_WORKER:
                    vh = (new >> VAL_SHIFT) & 3
                    if vh == 0:
                        w_v0 += 1
                    elif vh == 2:
                        w_v2 += 1
                    q = vh << (big_l - ((new >> NUM_SHIFT) - 1) // 2)
                    q2 += -q if new & F_PREFB else q
                elif ntg == TAG_CLOCK:
                    clocks += 1
                elif ntg == TAG_BACKUP:
                    backups += 1
                    b4[(new >> VAL_SHIFT) & 3] += 1
                elif new & F_PREFB:
                    term_b += 1
                else:
                    term_a += 1
                if check_level >= 1:
                    if (tg, ntg) not in _LEGAL_MAJ_TAG:
                        violations.append((steps, "tag"))
                    if (old & F_CC) == 0 and (new & F_CC):
                        violations.append((steps, "cc_flag"))
                    if tg == TAG_WORKER and ntg == TAG_WORKER:
                        if (new >> NUM_SHIFT) < (old >> NUM_SHIFT):
                            violations.append((steps, "phase_decrease"))
                if (
                    tg == TAG_WORKER and ntg == TAG_WORKER
                    and (new >> NUM_SHIFT) > (old >> NUM_SHIFT)
                    and (new >> NUM_SHIFT) & 1
                ):
                    entered_odd = True
            a[i] = ns
            a[j] = no
            if check_level >= 1 and 2 * clocks > n:
                violations.append((steps, "clock_cap"))
            if check_level >= 2:
                if (
                    pre_backups == 0 and pre_terms == 0
                    and backups == 0 and term_a + term_b == 0
                    and not entered_odd
                    and w_v0 - w_v2 < pre_delta
                ):
                    violations.append((steps, "delta_decrease"))
            if first_backup < 0 and backups > 0:
                first_backup = steps
            maj_term = term_a if majority_is_a else term_b
            if first_maj_term < 0 and maj_term > 0:
                first_maj_term = steps
            cert = _maj_cert(n, term_a, term_b, backups, b4)
        if check_level >= 2 and sample_every > 0 and steps % sample_every == 0:
            sample_point()
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if cert is not None else None,
        "certificate_output": cert,
        "violations": violations,
        "first_backup_step": first_backup,
        "first_majority_terminator_step": first_maj_term,
        "samples": samples,
        "final_codes": a,
        "trace": trace,
    }


def le_update_code(s, o, responder, rho, psi, tc, m):
    """One-sided leader-election update on packed states."""
    coin = (s ^ LF_COIN) & LF_COIN
    base = (s & ~LF_COIN) | coin
    ot = o & 3
    if ot == LE_CONT and (o & LF_INTER):
        return base
    cc = LF_CC if (s & LF_CC) and (o & LF_CC) else 0
    st = s & 3
    if st == LE_CONT and (s & LF_INTER):
        ind = LF_HIGH if o & LF_COIN else 0
        return (
            LE_CONT | coin | cc | (s & LF_CREATED) | ind
            | (((s >> NUM_SHIFT) + 1) << NUM_SHIFT)
        )
    if st == LE_CLOCK:
        pos = s >> NUM_SHIFT
        if ot == LE_CLOCK:
            op = o >> NUM_SHIFT
            lo, hi = (pos, op) if pos <= op else (op, pos)
            if lo < rho and hi >= psi - rho:
                if pos == hi:
                    pos += 1
                    if pos == psi:
                        pos = 0
            else:
                d = hi - lo
                circ = d if 2 * d <= psi else psi - d
                if circ >= rho:
                    return LE_FOLL | coin | cc | (1 << NUM_SHIFT)
                if pos < op or (pos == op and responder):
                    pos += 1
                    if pos == psi:
                        pos = 0
            if (s >> NUM_SHIFT) >= tc:
                cc = 0
        return LE_CLOCK | coin | cc | (pos << NUM_SHIFT)
    spair = ((s >> NUM_SHIFT) << 1) | (1 if s & LF_HIGH else 0)
    if st == LE_CONT:
        if ot == LE_CLOCK:
            phi = s >> NUM_SHIFT
            op = o >> NUM_SHIFT
            lbl = 1 if op < rho else (0 if 2 * rho <= op < 3 * rho else -1)
            if phi < m and lbl >= 0 and (phi & 1) == 1 - lbl:
                return (s & ~(LF_COIN | LF_CC)) | coin | cc | LF_INTER
            return (s & ~(LF_COIN | LF_CC)) | coin | cc
        opair = ((o >> NUM_SHIFT) << 1) | (1 if o & LF_HIGH else 0)
        if opair > spair:
            return LE_FOLL | coin | cc | (o & LF_HIGH) | (
                (o >> NUM_SHIFT) << NUM_SHIFT
            )
        if opair < spair or ot == LE_FOLL:
            return (s & ~(LF_COIN | LF_CC)) | coin | cc
        # Two contenders with equal pairs.
        if not (s & LF_CREATED) and not (o & LF_CREATED) and cc:
            if not responder:
                return LE_CLOCK | coin | cc  # position 0
            return (s & ~(LF_COIN | LF_CC)) | coin | cc | LF_CREATED
        if (s & LF_CREATED) and not (o & LF_CREATED):
            return LE_FOLL | coin | cc | (s & LF_HIGH) | (
                (s >> NUM_SHIFT) << NUM_SHIFT
            )
        if (o & LF_CREATED) and not (s & LF_CREATED):
            return (s & ~(LF_COIN | LF_CC)) | coin | cc
        if not responder:
            return LE_FOLL | coin | cc | (s & LF_HIGH) | (
                (s >> NUM_SHIFT) << NUM_SHIFT
            )
        return (s & ~(LF_COIN | LF_CC)) | coin | cc
    # Follower.
    if ot == LE_CLOCK:
        return (s & ~(LF_COIN | LF_CC)) | coin | cc
    opair = ((o >> NUM_SHIFT) << 1) | (1 if o & LF_HIGH else 0)
    if opair > spair:
        return LE_FOLL | coin | cc | (o & LF_HIGH) | (
            (o >> NUM_SHIFT) << NUM_SHIFT
        )
    return (s & ~(LF_COIN | LF_CC)) | coin | cc


def le_run(
    codes,
    rho,
    psi,
    tc,
    m,
    seed,
    max_interactions,
    check_level=1,
    sample_every=0,
    record_trace=False,
):
    """Run leader election until a single contender remains or the budget
    runs out."""
    a = list(codes)
    n = len(a)
    contenders = sum(1 for c in a if (c & 3) == LE_CONT)
    clocks = sum(1 for c in a if (c & 3) == LE_CLOCK)
    violations = []
    samples = []
    trace = [] if record_trace else None
    state = seed & MASK64
    steps = 0
    if check_level >= 2 and sample_every > 0:
        samples.append({"step": 0, "contenders": contenders, "clocks": clocks})
    while contenders > 1 and not violations and steps < max_interactions:
        i, j, state = _pair(state, n)
        s = a[i]
        o = a[j]
        ns = le_update_code(s, o, False, rho, psi, tc, m)
        no = le_update_code(o, s, True, rho, psi, tc, m)
        steps += 1
        if ns != s or no != o:
            if record_trace:
                trace.append((i, j, s, o, ns, no))
            pre_contenders = contenders
            for old, new in ((s, ns), (o, no)):
                tg = old & 3
                ntg = new & 3
                if tg == LE_CONT:
                    contenders -= 1
                elif tg == LE_CLOCK:
                    clocks -= 1
                if ntg == LE_CONT:
                    contenders += 1
                elif ntg == LE_CLOCK:
                    clocks += 1
                if check_level >= 1:
                    if tg == LE_FOLL and ntg != LE_FOLL:
                        violations.append((steps, "tag"))
                    if tg == LE_CLOCK and ntg == LE_CONT:
                        violations.append((steps, "tag"))
                    if (old & LF_CC) == 0 and (new & LF_CC):
                        violations.append((steps, "cc_flag"))
                    if tg == ntg and tg in (LE_CONT, LE_FOLL):
                        po = ((old >> NUM_SHIFT) << 1) | (
                            1 if old & LF_HIGH else 0
                        )
                        pn = ((new >> NUM_SHIFT) << 1) | (
                            1 if new & LF_HIGH else 0
                        )
                        if pn < po:
                            violations.append((steps, "pair_decrease"))
            a[i] = ns
            a[j] = no
            if check_level >= 1:
                if contenders > pre_contenders:
                    violations.append((steps, "contender_increase"))
                if contenders < 1:
                    violations.append((steps, "contender_zero"))
                if 2 * clocks > n:
                    violations.append((steps, "clock_cap"))
        if check_level >= 2 and sample_every > 0 and steps % sample_every == 0:
            samples.append(
                {"step": steps, "contenders": contenders, "clocks": clocks}
            )
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if contenders == 1 and not violations else None,
        "certificate_output": "LEADER" if contenders == 1 and not violations else None,
        "violations": violations,
        "contenders": contenders,
        "samples": samples,
        "final_codes": a,
        "trace": trace,
    }


def fourstate_run(codes, seed, max_interactions, record_trace=False):
    """Run the four-state protocol; checks conservation of #A - #B on
    every step and stops at the stable-decision certificate."""
    a = list(codes)
    n = len(a)
    cnt = [0, 0, 0, 0]
    for c in a:
        cnt[c] += 1
    diff0 = cnt[0] - cnt[1]
    violations = []
    trace = [] if record_trace else None
    state = seed & MASK64
    steps = 0

    def cert():
        if cnt[1] == 0 and cnt[3] == 0:
            return "WIN_A"
        if cnt[0] == 0 and cnt[2] == 0:
            return "WIN_B"
        return None

    out = cert()
    while out is None and not violations and steps < max_interactions:
        i, j, state = _pair(state, n)
        s = a[i]
        o = a[j]
        ns = FOUR_RULE[s * 4 + o]
        no = FOUR_RULE[o * 4 + s]
        steps += 1
        if ns != s or no != o:
            if record_trace:
                trace.append((i, j, s, o, ns, no))
            cnt[s] -= 1
            cnt[o] -= 1
            cnt[ns] += 1
            cnt[no] += 1
            a[i] = ns
            a[j] = no
            if cnt[0] - cnt[1] != diff0:
                violations.append((steps, "ab_diff"))
            out = cert()
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if out is not None else None,
        "certificate_output": out,
        "violations": violations,
        "final_counts": list(cnt),
        "final_codes": a,
        "trace": trace,
    }


def clock_run(
    n,
    rho,
    seed,
    max_interactions,
    sample_every=0,
    alpha=0.25,
    stop_on_violation=True,
):
    """Unbounded two-choice counters from an all-zero start.

    While the gap stays below rho this is step-for-step equivalent to the
    wrapped phase clock, and the gap equals the wrap-adjusted weight gap.
    Tracks the global max/min incrementally; the minimum count is rebuilt
    by a scan only when the last minimal agent moves up.
    """
    import math

    u = [0] * n
    mn = 0
    cnt_mn = n
    mx = 0
    max_gap = 0
    violation_step = -1
    samples = []
    state = seed & MASK64
    steps = 0

    def gamma():
        mean = sum(u) / n
        return sum(
            math.exp(alpha * (v - mean)) + math.exp(-alpha * (v - mean))
            for v in u
        )

    if sample_every > 0:
        samples.append((0, 0, gamma()))
    while steps < max_interactions:
        i, j, state = _pair(state, n)
        t = i if u[i] < u[j] else j  # ties go to the responder j
        old = u[t]
        u[t] = old + 1
        if old == mn:
            cnt_mn -= 1
            if cnt_mn == 0:
                mn += 1
                cnt_mn = sum(1 for v in u if v == mn)
        if u[t] > mx:
            mx = u[t]
        steps += 1
        g = mx - mn
        if g > max_gap:
            max_gap = g
        if g >= rho and violation_step < 0:
            violation_step = steps
            if stop_on_violation:
                break
        if sample_every > 0 and steps % sample_every == 0:
            samples.append((steps, g, gamma()))
    return {
        "n": n,
        "interactions": steps,
        "max_gap": max_gap,
        "violation_step": violation_step,
        "samples": samples,
        "final_counters": u,
    }


def rumor_run(n, s_size, seed, max_interactions):
    """Rumor spreading restricted to the target set; see core.rumor_experiment."""
    informed = [False] * n
    source = s_size if s_size < n else 0
    informed[source] = True
    done = 1 if source < s_size else 0
    state = seed & MASK64
    steps = 0
    while done < s_size:
        if steps >= max_interactions:
            return {"n": n, "interactions": -1, "informed": done}
        i, j, state = _pair(state, n)
        steps += 1
        if informed[j] and not informed[i] and i < s_size:
            informed[i] = True
            done += 1
        elif informed[i] and not informed[j] and j < s_size:
            informed[j] = True
            done += 1
    return {"n": n, "interactions": steps, "informed": done}
