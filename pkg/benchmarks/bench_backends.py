#!/usr/bin/env python3
"""Benchmark the numba-compiled scan kernels against their numpy twins.

Runs each hot kernel on a sweep-sized workload with both backends and
prints JSON timings. The numba path needs numba importable; the numpy path
always runs.

    python benchmarks/bench_backends.py [--states N] [--runs K] [-o FILE]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from divlab.kernels import (
    _d_pair_scan_loops,
    _d_pair_scan_numpy,
    _nm1_state_scan_loops,
    _nm1_state_scan_numpy,
    _pi_pair_scan_loops,
    _pi_pair_scan_numpy,
    jacobi_eigh,
)

try:
    from numba import njit
except ImportError:
    njit = None


def bench(func, args, runs):
    func(*args)  # warmup (and JIT compile)
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        result = func(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--states", type=int, default=2304,
                        help="Bloch grid size (default: the stock 24x12x8)")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("-o", "--output", help="write JSON here instead of stdout")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    n = args.states
    th = rng.uniform(0, np.pi, n)
    ph = rng.uniform(0, 2 * np.pi, n)
    r = rng.uniform(0, 1, n)
    pop = 0.5 * (1 + r * np.cos(th))
    cx = 0.5 * r * np.sin(th) * np.cos(ph)
    cy = 0.5 * r * np.sin(th) * np.sin(ph)
    pt = 0.25 * pop
    ct2 = 0.25 * (cx * cx + cy * cy)
    es = np.linspace(0.1, 0.99, 13)
    sub = slice(0, max(64, n // 24))

    workloads = {
        "pi_pair_scan": (
            _pi_pair_scan_loops, _pi_pair_scan_numpy,
            (pop, cx, cy, 0.49, 0.81),
        ),
        "nm1_state_scan": (
            _nm1_state_scan_loops, _nm1_state_scan_numpy,
            (pt, ct2, 1.06, 2.4, 0.01, 2.0, 0.01, 0.99, 99),
        ),
        "d_pair_scan": (
            _d_pair_scan_loops, _d_pair_scan_numpy,
            (pop[sub], cx[sub], cy[sub], es),
        ),
    }

    results = {"states": n, "runs": args.runs, "kernels": {}}
    for name, (loops, vectorized, wargs) in workloads.items():
        entry = {}
        t_np, ref = bench(vectorized, wargs, args.runs)
        entry["numpy_s"] = t_np
        if njit is not None:
            compiled = njit(cache=True)(loops)
            t_nb, out = bench(compiled, wargs, args.runs)
            entry["numba_s"] = t_nb
            entry["speedup"] = t_np / t_nb
            entry["agree"] = bool(abs(out[0] - ref[0]) < 1e-12)
        results["kernels"][name] = entry

    # the Jacobi eigensolver is single-source; report the active backend only
    mats = rng.normal(size=(200, 4, 4)) + 1j * rng.normal(size=(200, 4, 4))
    mats = 0.5 * (mats + np.conj(np.transpose(mats, (0, 2, 1))))
    jacobi_eigh(mats[0])
    start = time.perf_counter()
    for m in mats:
        jacobi_eigh(m)
    results["kernels"]["jacobi_eigh_200x"] = {
        "active_backend_s": time.perf_counter() - start,
    }

    payload = json.dumps(results, indent=2)
    if args.output:
        Path(args.output).write_text(payload + "\n")
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        print(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
