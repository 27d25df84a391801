# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Semantics and random streams are identical to kernels/pure.py (the state
encodings are documented there); results must compare equal between the
two backends.
"""

from libc.stdlib cimport free, malloc
from libc.math cimport exp

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _MIX2 = 0x94D049BB133111EBULL

DEF TAG_WORKER = 0
DEF TAG_CLOCK = 1
DEF TAG_BACKUP = 2
DEF TAG_TERM = 3
DEF F_INITB = 4
DEF F_CC = 8
DEF VAL_SHIFT = 4
DEF VAL_MASK = 48
DEF F_PREFB = 64
DEF NUM_SHIFT = 8

DEF LE_CONT = 0
DEF LE_FOLL = 1
DEF LE_CLOCK = 2
DEF LF_COIN = 4
DEF LF_CC = 8
DEF LF_CREATED = 16
DEF LF_INTER = 32
DEF LF_HIGH = 64

cdef int[16] FOUR_RULE_C
FOUR_RULE_C[:] = [0, 2, 0, 0, 3, 1, 1, 1, 2, 3, 2, 2, 2, 3, 3, 3]


cdef inline u64 _mix(u64 z) nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline u64 _next(u64 *state) nogil:
    state[0] = state[0] + _GOLDEN
    return _mix(state[0])


cdef inline u64 _randbelow(u64 *state, u64 bound) nogil:
    cdef u64 rem = (0 - bound) % bound
    cdef u64 limit = (<u64>0xFFFFFFFFFFFFFFFFULL) - rem
    cdef u64 z
    while True:
        z = _next(state)
        if z <= limit:
            return z % bound


cdef inline void _pair_c(u64 *state, i64 n, i64 *i, i64 *j) nogil:
    i[0] = <i64>_randbelow(state, <u64>n)
    j[0] = <i64>_randbelow(state, <u64>(n - 1))
    if j[0] >= i[0]:
        j[0] += 1


cdef i64 _maj_update(i64 s, i64 o, bint responder, i64 rho, i64 psi,
                     i64 tc, i64 m) nogil:
    cdef i64 st = s & 3
    cdef i64 ot = o & 3
    cdef i64 cc, prefb, initb, pos, op, lo, hi, d, circ, phi, lbl, vh, ovh
    cdef i64 oph, dph
    cdef bint inc, s_strong, o_strong
    if st == TAG_BACKUP or ot == TAG_BACKUP:
        if st == TAG_BACKUP and ot == TAG_BACKUP:
            return (s & ~<i64>VAL_MASK) | (
                <i64>FOUR_RULE_C[((s >> VAL_SHIFT) & 3) * 4
                                 + ((o >> VAL_SHIFT) & 3)] << VAL_SHIFT
            )
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
    cc = F_CC if (s & F_CC) and (o & F_CC) else 0
    prefb = s & F_PREFB
    s_strong = st == TAG_WORKER and (s & VAL_MASK) != 0
    o_strong = ot == TAG_WORKER and (o & VAL_MASK) != 0
    if (not s_strong) and o_strong:
        prefb = o & F_PREFB
    initb = s & F_INITB
    if st == TAG_CLOCK:
        pos = s >> NUM_SHIFT
        if ot == TAG_CLOCK:
            op = o >> NUM_SHIFT
            if pos <= op:
                lo = pos
                hi = op
            else:
                lo = op
                hi = pos
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
    phi = s >> NUM_SHIFT
    if ot == TAG_CLOCK:
        op = o >> NUM_SHIFT
        lbl = 1 if op < rho else (0 if (2 * rho <= op and op < 3 * rho) else -1)
        inc = lbl >= 0 and (phi & 1) == 1 - lbl
    else:
        inc = phi == (o >> NUM_SHIFT) - 1
    if inc:
        vh = (s >> VAL_SHIFT) & 3
        if phi == m or ((phi & 1) == 0 and vh == 2):
            return TAG_TERM | initb | cc | (s & F_PREFB)
        if (phi & 1) == 0 and vh == 1:
            vh = 2
        return (TAG_WORKER | initb | cc | prefb | (vh << VAL_SHIFT)
                | ((phi + 1) << NUM_SHIFT))
    if ot == TAG_CLOCK:
        return (TAG_WORKER | initb | cc | prefb | (s & VAL_MASK)
                | (phi << NUM_SHIFT))
    oph = o >> NUM_SHIFT
    dph = phi - oph
    if dph > 1 or dph < -1:
        return TAG_BACKUP | initb | cc | ((1 << VAL_SHIFT) if initb else 0)
    if dph != 0:
        return (TAG_WORKER | initb | cc | prefb | (s & VAL_MASK)
                | (phi << NUM_SHIFT))
    vh = (s >> VAL_SHIFT) & 3
    ovh = (o >> VAL_SHIFT) & 3
    if phi & 1:
        if vh == 2 and ovh == 2 and (s ^ o) & F_PREFB:
            if cc and not (s & F_PREFB):
                return TAG_CLOCK | initb | cc
            vh = 0
    else:
        if vh + ovh == 2:
            vh = 1
    return (TAG_WORKER | initb | cc | prefb | (vh << VAL_SHIFT)
            | (phi << NUM_SHIFT))


def maj_update_code(s, o, responder, rho, psi, tc, m):
    return _maj_update(s, o, bool(responder), rho, psi, tc, m)


cdef object _maj_cert_c(i64 n, i64 term_a, i64 term_b, i64 backups, i64 *b4):
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


cdef inline bint _maj_tag_legal(i64 tg, i64 ntg) nogil:
    if tg == TAG_WORKER:
        return True
    if tg == TAG_CLOCK:
        return ntg != TAG_WORKER
    if tg == TAG_BACKUP:
        return ntg == TAG_BACKUP
    return ntg == TAG_TERM or ntg == TAG_BACKUP


def maj_run(codes, rho, psi, tc, m, big_l, seed, max_interactions,
            check_level=1, sample_every=0, eps_n=0, majority_is_a=True,
            record_trace=False):
    cdef i64 n = len(codes)
    cdef i64 *a = <i64 *>malloc(n * sizeof(i64))
    if a == NULL:
        raise MemoryError()
    cdef i64 c_rho = rho, c_psi = psi, c_tc = tc, c_m = m, c_l = big_l
    cdef i64 budget = max_interactions
    cdef int c_check = check_level
    cdef i64 c_sample = sample_every
    cdef i64 c_epsn = eps_n
    cdef bint c_maj_a = bool(majority_is_a)
    cdef bint c_trace = bool(record_trace)
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFFULL)
    cdef i64 term_a = 0, term_b = 0, backups = 0, clocks = 0
    cdef i64 b4[4]
    cdef i64 w_v0 = 0, w_v2 = 0, q2 = 0
    cdef i64 steps = 0, first_backup = -1, first_maj_term = -1
    cdef i64 k, c, tg, vh, q, i, j, s, o, ns, no, ntg
    cdef i64 pre_backups, pre_terms, pre_delta, maj_term, bound
    cdef i64 old, new, r
    cdef bint entered_odd, ok
    b4[0] = b4[1] = b4[2] = b4[3] = 0
    for k in range(n):
        a[k] = codes[k]
        c = a[k]
        tg = c & 3
        if tg == TAG_WORKER:
            vh = (c >> VAL_SHIFT) & 3
            if vh == 0:
                w_v0 += 1
            elif vh == 2:
                w_v2 += 1
            q = vh << (c_l - ((c >> NUM_SHIFT) - 1) // 2)
            q2 += -q if c & F_PREFB else q
        elif tg == TAG_CLOCK:
            clocks += 1
        elif tg == TAG_BACKUP:
            backups += 1
            b4[(c >> VAL_SHIFT) & 3] += 1
        elif c & F_PREFB:
            term_b += 1
        else:
            term_a += 1
    violations = []
    samples = []
    trace = [] if c_trace else None
    cdef i64 strong_a, strong_b, pmin, pmax, ph
    cdef object cert
    # initial sample
    if c_check >= 2 and c_sample > 0:
        strong_a = 0
        strong_b = 0
        pmin = -1
        pmax = -1
        for k in range(n):
            c = a[k]
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
        samples.append({
            "step": steps, "q2": q2, "delta": w_v0 - w_v2,
            "clocks": clocks, "backups": backups,
            "term_a": term_a, "term_b": term_b,
            "strong_a": strong_a, "strong_b": strong_b,
            "min_phase": pmin, "max_phase": pmax,
        })
        maj_term = term_a if c_maj_a else term_b
        if c_epsn > 0 and backups == 0 and maj_term == 0:
            bound = 2 * c_epsn * n
            ok = q2 >= bound if c_maj_a else q2 <= -bound
            if not ok:
                violations.append((steps, "q_invariant"))
    cert = _maj_cert_c(n, term_a, term_b, backups, b4)
    while cert is None and len(violations) == 0 and steps < budget:
        _pair_c(&state, n, &i, &j)
        s = a[i]
        o = a[j]
        ns = _maj_update(s, o, False, c_rho, c_psi, c_tc, c_m)
        no = _maj_update(o, s, True, c_rho, c_psi, c_tc, c_m)
        steps += 1
        if ns != s or no != o:
            if c_trace:
                trace.append((i, j, s, o, ns, no))
            pre_backups = backups
            pre_terms = term_a + term_b
            pre_delta = w_v0 - w_v2
            entered_odd = False
            for r in range(2):
                if r == 0:
                    old = s
                    new = ns
                else:
                    old = o
                    new = no
                tg = old & 3
                ntg = new & 3
                if tg == TAG_WORKER:
                    vh = (old >> VAL_SHIFT) & 3
                    if vh == 0:
                        w_v0 -= 1
                    elif vh == 2:
                        w_v2 -= 1
                    q = vh << (c_l - ((old >> NUM_SHIFT) - 1) // 2)
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
                    q = vh << (c_l - ((new >> NUM_SHIFT) - 1) // 2)
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
                if c_check >= 1:
                    if not _maj_tag_legal(tg, ntg):
                        violations.append((steps, "tag"))
                    if (old & F_CC) == 0 and (new & F_CC):
                        violations.append((steps, "cc_flag"))
                    if tg == TAG_WORKER and ntg == TAG_WORKER:
                        if (new >> NUM_SHIFT) < (old >> NUM_SHIFT):
                            violations.append((steps, "phase_decrease"))
                if (tg == TAG_WORKER and ntg == TAG_WORKER
                        and (new >> NUM_SHIFT) > (old >> NUM_SHIFT)
                        and ((new >> NUM_SHIFT) & 1)):
                    entered_odd = True
            a[i] = ns
            a[j] = no
            if c_check >= 1 and 2 * clocks > n:
                violations.append((steps, "clock_cap"))
            if c_check >= 2:
                if (pre_backups == 0 and pre_terms == 0
                        and backups == 0 and term_a + term_b == 0
                        and not entered_odd
                        and w_v0 - w_v2 < pre_delta):
                    violations.append((steps, "delta_decrease"))
            if first_backup < 0 and backups > 0:
                first_backup = steps
            maj_term = term_a if c_maj_a else term_b
            if first_maj_term < 0 and maj_term > 0:
                first_maj_term = steps
            cert = _maj_cert_c(n, term_a, term_b, backups, b4)
        if c_check >= 2 and c_sample > 0 and steps % c_sample == 0:
            strong_a = 0
            strong_b = 0
            pmin = -1
            pmax = -1
            for k in range(n):
                c = a[k]
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
            samples.append({
                "step": steps, "q2": q2, "delta": w_v0 - w_v2,
                "clocks": clocks, "backups": backups,
                "term_a": term_a, "term_b": term_b,
                "strong_a": strong_a, "strong_b": strong_b,
                "min_phase": pmin, "max_phase": pmax,
            })
            maj_term = term_a if c_maj_a else term_b
            if c_epsn > 0 and backups == 0 and maj_term == 0:
                bound = 2 * c_epsn * n
                ok = q2 >= bound if c_maj_a else q2 <= -bound
                if not ok:
                    violations.append((steps, "q_invariant"))
    final_codes = [a[k] for k in range(n)]
    free(a)
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if cert is not None else None,
        "certificate_output": cert,
        "violations": violations,
        "first_backup_step": first_backup,
        "first_majority_terminator_step": first_maj_term,
        "samples": samples,
        "final_codes": final_codes,
        "trace": trace,
    }


cdef i64 _le_update(i64 s, i64 o, bint responder, i64 rho, i64 psi,
                    i64 tc, i64 m) nogil:
    cdef i64 coin = (s ^ LF_COIN) & LF_COIN
    cdef i64 ot = o & 3
    cdef i64 st, cc, pos, op, lo, hi, d, circ, phi, lbl, spair, opair, ind
    if ot == LE_CONT and (o & LF_INTER):
        return (s & ~<i64>LF_COIN) | coin
    cc = LF_CC if (s & LF_CC) and (o & LF_CC) else 0
    st = s & 3
    if st == LE_CONT and (s & LF_INTER):
        ind = LF_HIGH if o & LF_COIN else 0
        return (LE_CONT | coin | cc | (s & LF_CREATED) | ind
                | (((s >> NUM_SHIFT) + 1) << NUM_SHIFT))
    if st == LE_CLOCK:
        pos = s >> NUM_SHIFT
        if ot == LE_CLOCK:
            op = o >> NUM_SHIFT
            if pos <= op:
                lo = pos
                hi = op
            else:
                lo = op
                hi = pos
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
            lbl = 1 if op < rho else (
                0 if (2 * rho <= op and op < 3 * rho) else -1
            )
            if phi < m and lbl >= 0 and (phi & 1) == 1 - lbl:
                return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc | LF_INTER
            return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc
        opair = ((o >> NUM_SHIFT) << 1) | (1 if o & LF_HIGH else 0)
        if opair > spair:
            return (LE_FOLL | coin | cc | (o & LF_HIGH)
                    | ((o >> NUM_SHIFT) << NUM_SHIFT))
        if opair < spair or ot == LE_FOLL:
            return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc
        if (not (s & LF_CREATED)) and (not (o & LF_CREATED)) and cc:
            if not responder:
                return LE_CLOCK | coin | cc
            return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc | LF_CREATED
        if (s & LF_CREATED) and not (o & LF_CREATED):
            return (LE_FOLL | coin | cc | (s & LF_HIGH)
                    | ((s >> NUM_SHIFT) << NUM_SHIFT))
        if (o & LF_CREATED) and not (s & LF_CREATED):
            return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc
        if not responder:
            return (LE_FOLL | coin | cc | (s & LF_HIGH)
                    | ((s >> NUM_SHIFT) << NUM_SHIFT))
        return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc
    if ot == LE_CLOCK:
        return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc
    opair = ((o >> NUM_SHIFT) << 1) | (1 if o & LF_HIGH else 0)
    if opair > spair:
        return (LE_FOLL | coin | cc | (o & LF_HIGH)
                | ((o >> NUM_SHIFT) << NUM_SHIFT))
    return (s & ~<i64>(LF_COIN | LF_CC)) | coin | cc


def le_update_code(s, o, responder, rho, psi, tc, m):
    return _le_update(s, o, bool(responder), rho, psi, tc, m)


def le_run(codes, rho, psi, tc, m, seed, max_interactions,
           check_level=1, sample_every=0, record_trace=False):
    cdef i64 n = len(codes)
    cdef i64 *a = <i64 *>malloc(n * sizeof(i64))
    if a == NULL:
        raise MemoryError()
    cdef i64 c_rho = rho, c_psi = psi, c_tc = tc, c_m = m
    cdef i64 budget = max_interactions
    cdef int c_check = check_level
    cdef i64 c_sample = sample_every
    cdef bint c_trace = bool(record_trace)
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFFULL)
    cdef i64 contenders = 0, clocks = 0, steps = 0
    cdef i64 k, i, j, s, o, ns, no, tg, ntg, po, pn, r, old, new
    cdef i64 pre_contenders
    for k in range(n):
        a[k] = codes[k]
        tg = a[k] & 3
        if tg == LE_CONT:
            contenders += 1
        elif tg == LE_CLOCK:
            clocks += 1
    violations = []
    samples = []
    trace = [] if c_trace else None
    if c_check >= 2 and c_sample > 0:
        samples.append({"step": 0, "contenders": contenders, "clocks": clocks})
    while contenders > 1 and len(violations) == 0 and steps < budget:
        _pair_c(&state, n, &i, &j)
        s = a[i]
        o = a[j]
        ns = _le_update(s, o, False, c_rho, c_psi, c_tc, c_m)
        no = _le_update(o, s, True, c_rho, c_psi, c_tc, c_m)
        steps += 1
        if ns != s or no != o:
            if c_trace:
                trace.append((i, j, s, o, ns, no))
            pre_contenders = contenders
            for r in range(2):
                if r == 0:
                    old = s
                    new = ns
                else:
                    old = o
                    new = no
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
                if c_check >= 1:
                    if tg == LE_FOLL and ntg != LE_FOLL:
                        violations.append((steps, "tag"))
                    if tg == LE_CLOCK and ntg == LE_CONT:
                        violations.append((steps, "tag"))
                    if (old & LF_CC) == 0 and (new & LF_CC):
                        violations.append((steps, "cc_flag"))
                    if tg == ntg and (tg == LE_CONT or tg == LE_FOLL):
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
            if c_check >= 1:
                if contenders > pre_contenders:
                    violations.append((steps, "contender_increase"))
                if contenders < 1:
                    violations.append((steps, "contender_zero"))
                if 2 * clocks > n:
                    violations.append((steps, "clock_cap"))
        if c_check >= 2 and c_sample > 0 and steps % c_sample == 0:
            samples.append(
                {"step": steps, "contenders": contenders, "clocks": clocks}
            )
    final_codes = [a[k] for k in range(n)]
    free(a)
    done = contenders == 1 and len(violations) == 0
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if done else None,
        "certificate_output": "LEADER" if done else None,
        "violations": violations,
        "contenders": contenders,
        "samples": samples,
        "final_codes": final_codes,
        "trace": trace,
    }


def fourstate_run(codes, seed, max_interactions, record_trace=False):
    cdef i64 n = len(codes)
    cdef i64 *a = <i64 *>malloc(n * sizeof(i64))
    if a == NULL:
        raise MemoryError()
    cdef i64 cnt[4]
    cdef i64 k, i, j, s, o, ns, no, steps = 0, diff0
    cdef i64 budget = max_interactions
    cdef bint c_trace = bool(record_trace)
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFFULL)
    cnt[0] = cnt[1] = cnt[2] = cnt[3] = 0
    for k in range(n):
        a[k] = codes[k]
        cnt[a[k]] += 1
    diff0 = cnt[0] - cnt[1]
    violations = []
    trace = [] if c_trace else None
    out = None
    if cnt[1] == 0 and cnt[3] == 0:
        out = "WIN_A"
    elif cnt[0] == 0 and cnt[2] == 0:
        out = "WIN_B"
    while out is None and len(violations) == 0 and steps < budget:
        _pair_c(&state, n, &i, &j)
        s = a[i]
        o = a[j]
        ns = FOUR_RULE_C[s * 4 + o]
        no = FOUR_RULE_C[o * 4 + s]
        steps += 1
        if ns != s or no != o:
            if c_trace:
                trace.append((i, j, s, o, ns, no))
            cnt[s] -= 1
            cnt[o] -= 1
            cnt[ns] += 1
            cnt[no] += 1
            a[i] = ns
            a[j] = no
            if cnt[0] - cnt[1] != diff0:
                violations.append((steps, "ab_diff"))
            if cnt[1] == 0 and cnt[3] == 0:
                out = "WIN_A"
            elif cnt[0] == 0 and cnt[2] == 0:
                out = "WIN_B"
    final_codes = [a[k] for k in range(n)]
    free(a)
    return {
        "n": n,
        "interactions": steps,
        "certificate_step": steps if out is not None else None,
        "certificate_output": out,
        "violations": violations,
        "final_counts": [cnt[0], cnt[1], cnt[2], cnt[3]],
        "final_codes": final_codes,
        "trace": trace,
    }


def clock_run(n, rho, seed, max_interactions, sample_every=0, alpha=0.25,
              stop_on_violation=True):
    cdef i64 c_n = n
    cdef i64 *u = <i64 *>malloc(c_n * sizeof(i64))
    if u == NULL:
        raise MemoryError()
    cdef i64 c_rho = rho
    cdef i64 budget = max_interactions
    cdef i64 c_sample = sample_every
    cdef double c_alpha = alpha
    cdef bint c_stop = bool(stop_on_violation)
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFFULL)
    cdef i64 mn = 0, cnt_mn = c_n, mx = 0, max_gap = 0
    cdef i64 violation_step = -1, steps = 0
    cdef i64 k, i, j, t, old, g
    cdef i64 total
    cdef double mean, gm
    for k in range(c_n):
        u[k] = 0
    samples = []
    if c_sample > 0:
        samples.append((0, 0, 2.0 * c_n))
    while steps < budget:
        _pair_c(&state, c_n, &i, &j)
        t = i if u[i] < u[j] else j
        old = u[t]
        u[t] = old + 1
        if old == mn:
            cnt_mn -= 1
            if cnt_mn == 0:
                mn += 1
                cnt_mn = 0
                for k in range(c_n):
                    if u[k] == mn:
                        cnt_mn += 1
        if u[t] > mx:
            mx = u[t]
        steps += 1
        g = mx - mn
        if g > max_gap:
            max_gap = g
        if g >= c_rho and violation_step < 0:
            violation_step = steps
            if c_stop:
                break
        if c_sample > 0 and steps % c_sample == 0:
            total = 0
            for k in range(c_n):
                total += u[k]
            mean = (<double>total) / c_n
            gm = 0.0
            for k in range(c_n):
                gm += exp(c_alpha * (u[k] - mean)) + exp(-c_alpha * (u[k] - mean))
            samples.append((steps, g, gm))
    final_counters = [u[k] for k in range(c_n)]
    free(u)
    return {
        "n": n,
        "interactions": steps,
        "max_gap": max_gap,
        "violation_step": violation_step,
        "samples": samples,
        "final_counters": final_counters,
    }


def rumor_run(n, s_size, seed, max_interactions):
    cdef i64 c_n = n, c_s = s_size
    cdef i64 budget = max_interactions
    cdef char *informed = <char *>malloc(c_n * sizeof(char))
    if informed == NULL:
        raise MemoryError()
    cdef i64 k, i, j, source, done = 0, steps = 0
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFFULL)
    for k in range(c_n):
        informed[k] = 0
    source = c_s if c_s < c_n else 0
    informed[source] = 1
    if source < c_s:
        done = 1
    while done < c_s:
        if steps >= budget:
            free(informed)
            return {"n": n, "interactions": -1, "informed": done}
        _pair_c(&state, c_n, &i, &j)
        steps += 1
        if informed[j] and not informed[i] and i < c_s:
            informed[i] = 1
            done += 1
        elif informed[i] and not informed[j] and j < c_s:
            informed[j] = 1
            done += 1
    free(informed)
    return {"n": n, "interactions": steps, "informed": done}
