#!/usr/bin/env python3
"""Throughput comparison between the compiled and pure-Python kernels.

Runs each simulation kernel on both backends with identical seeds, checks
that the results agree, and prints interactions per second plus speedup.

Usage: python benchmarks/bench_kernels.py [--n 1024] [--budget 2000000]
"""

import argparse
import math
import time
from fractions import Fraction

from popproto import encoding, leader, majority
from popproto.kernels import pure

try:
    from popproto.kernels import _speedups as compiled
except ImportError:
    compiled = None


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    res = fn(*args, **kw)
    return res, time.perf_counter() - t0


def bench_case(name, steps_of, pure_fn, compiled_fn, args, kw):
    res_p, t_p = timed(pure_fn, *args, **kw)
    row = f"{name:<12} pure {steps_of(res_p) / t_p / 1e6:8.2f} M/s"
    if compiled_fn is not None:
        res_c, t_c = timed(compiled_fn, *args, **kw)
        assert res_c == res_p, f"{name}: backends disagree"
        row += (
            f"   compiled {steps_of(res_c) / t_c / 1e6:8.2f} M/s"
            f"   speedup {t_p / t_c:6.1f}x"
        )
    print(row)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--budget", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args()
    n, budget, seed = a.n, a.budget, a.seed
    big_l = math.ceil(math.log2(n))

    if compiled is None:
        print("compiled extension not available; timing the pure backend only")
    print(f"n={n}, budget={budget} interactions per kernel, seed={seed}\n")

    mp = majority.MajorityParams.default(n)
    codes = [
        encoding.encode_maj(s)
        for s in majority.initial_config(n, Fraction(2, n), "A").agents
    ]
    margs = (codes, mp.clock.rho, mp.clock.psi, mp.clock.tc, mp.m_phases,
             big_l, seed, budget)
    bench_case(
        "majority", lambda r: r["interactions"],
        pure.maj_run, compiled and compiled.maj_run,
        margs, dict(check_level=0),
    )

    lp = leader.LEParams.default(n)
    lcodes = [encoding.encode_le(s) for s in leader.le_initial(n).agents]
    largs = (lcodes, lp.clock.rho, lp.clock.psi, lp.clock.tc, lp.m, seed,
             budget)
    bench_case(
        "leader", lambda r: r["interactions"],
        pure.le_run, compiled and compiled.le_run,
        largs, dict(check_level=0),
    )

    half = n // 2
    fcodes = [0] * (n - half) + [1] * half
    bench_case(
        "four-state", lambda r: r["interactions"],
        pure.fourstate_run, compiled and compiled.fourstate_run,
        (fcodes, seed, budget), {},
    )

    rho = math.ceil(8 * math.log(n))
    bench_case(
        "phase-clock", lambda r: r["interactions"],
        pure.clock_run, compiled and compiled.clock_run,
        (n, rho, seed, budget), {},
    )

    bench_case(
        "rumor", lambda r: max(r["interactions"], 1),
        pure.rumor_run, compiled and compiled.rumor_run,
        (n, n, seed, budget), {},
    )


if __name__ == "__main__":
    main()
