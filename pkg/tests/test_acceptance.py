"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line each. Run withpytest -s to see the lines as they complete.

The default sweep (gamma0 = lambda = 2, tau = 0.01, t in [0, 5] step 0.01,
family 0.01:0.99:99, stock optimizer settings) is computed once and shared.
"""

import time

import numpy as np
import pytest

from divlab.channels import (
    JCParams,
    apply_ad,
    decay_amplitude,
    integrate_lindblad,
    interval_map,
)
from divlab.cli import render_csv
from divlab.inequalities import SweepConfig, sweep
from divlab.qmat import trace_distance
from conftest import random_density
import oracles

BACKFLOW = JCParams(2.0, 2.0)


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="module")
def default_sweep():
    cfg = SweepConfig()
    started = time.perf_counter()
    records = sweep(cfg)
    duration = time.perf_counter() - started
    return cfg, records, duration


def test_cp_measure_equals_closed_form():
    """cp excess vs max(g^2 - 1, 0) on the default grid, |err| <= 1e-9."""
    from divlab.measures import cp_indivisibility

    cfg = SweepConfig()
    started = time.perf_counter()
    worst = 0.0
    n_checked = 0
    for t in cfg.time_grid():
        t = float(t)
        ratio = interval_map(t, cfg.tau, BACKFLOW)
        if ratio.singular:
            continue
        val = cp_indivisibility(BACKFLOW, t, cfg.tau)
        worst = max(worst, abs(val - max(ratio.g ** 2 - 1.0, 0.0)))
        n_checked += 1
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 10.0
    _report("cp closed-form oracle", ok,
            f"{n_checked} points, worst |err| {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert elapsed < 10.0


def test_integrator_cross_check():
    """Closed-form amplitude vs RK4 trajectory, sup norm <= 1e-6 on [0, 2]."""
    started = time.perf_counter()
    sups = {}
    for params in (JCParams(0.5, 2.0), JCParams(2.0, 2.0)):
        traj = integrate_lindblad(params, 2.0, dt=1e-4)
        closed = np.array([decay_amplitude(float(t), params) for t in traj.times])
        sups[params.gamma0] = float(np.abs(traj.amplitudes - closed).max())
        assert not traj.clamped
    elapsed = time.perf_counter() - started
    worst = max(sups.values())
    ok = worst <= 1e-6 and elapsed < 10.0
    _report("integrator cross-check", ok,
            f"sup errors {sups}, {elapsed:.2f}s")
    assert worst <= 1e-6
    assert elapsed < 10.0


def test_p_inequality_on_default_sweep(default_sweep):
    """lhs <= 2*nm1 + d and the strict lhs <= 2*nm1 at every non-null point."""
    _cfg, records, duration = default_sweep
    live = [r for r in records if not r.singular]
    bad_p = [r.t for r in live if not r.ok_p]
    bad_strict = [r.t for r in live if not r.ok_p_strict]
    strict_margin = min(2.0 * r.nm1 - r.p_i for r in live)
    ok = not bad_p and not bad_strict and duration < 1800.0
    _report("p-inequality sweep", ok,
            f"{len(live)} live records, strict worst margin {strict_margin:.2e}, "
            f"sweep {duration:.0f}s")
    assert bad_p == []
    assert bad_strict == []
    assert duration < 1800.0


def test_cp_inequality_on_default_sweep(default_sweep):
    """nm2 <= cp/2 + 1 at every non-null point, and nm2 <= 1 everywhere.

    The second clause fails honestly: wherever the default grid lands next
    to a zero of G (t = 2.36, 2.37), the interval ratio g is far above 1 and
    the interval map's Choi matrix is far from positive, so its distance to
    the free set exceeds the unit bound that holds for state pairs
    (nm2 ~ g^2/2 >> 1 while cp/2 + 1 grows alongside and keeps the
    inequality itself satisfied).
    """
    _cfg, records, _duration = default_sweep
    live = [r for r in records if not r.singular]
    bad_cp = [r.t for r in live if not r.ok_cp]
    over_unit = [(r.t, r.nm2) for r in live if r.nm2 > 1.0]
    ok = not bad_cp and not over_unit
    _report("cp-inequality sweep", ok,
            f"cp violations {bad_cp}, nm2>1 at {over_unit}")
    assert bad_cp == []
    assert over_unit == [], (
        "nm2 <= 1 cannot hold near zeros of G: the interval map is not a "
        "channel there and its Choi matrix is far from a state; see "
        f"offending (t, nm2) pairs {over_unit}"
    )


def test_divisible_regime_nullity():
    """gamma0 = 0.5 sweep: p and cp excesses <= 1e-9, nm1 <= 1e-6."""
    cfg = SweepConfig(gamma0=0.5)
    records = sweep(cfg)
    worst_p = max(r.p_i for r in records)
    worst_cp = max(r.cp_i for r in records)
    worst_nm1 = max(r.nm1 for r in records)
    ok = worst_p <= 1e-9 and worst_cp <= 1e-9 and worst_nm1 <= 1e-6
    _report("divisible-regime nullity", ok,
            f"max p_i {worst_p:.2e}, max cp_i {worst_cp:.2e}, "
            f"max nm1 {worst_nm1:.2e}")
    assert worst_p <= 1e-9
    assert worst_cp <= 1e-9
    assert worst_nm1 <= 1e-6


def test_optimizers_match_exhaustive_search(default_sweep):
    """At 10 random non-singular grid times, each optimized measure agrees
    with dense exhaustive search within 1e-3."""
    cfg, records, _duration = default_sweep
    live = [r for r in records if not r.singular]
    rng = np.random.default_rng(20260809)
    picks = rng.choice(len(live), size=10, replace=False)
    worst = {"p_i": 0.0, "nm1": 0.0, "nm2": 0.0, "d": 0.0}
    for k in picks:
        r = live[k]
        g0_amp = decay_amplitude(r.t, BACKFLOW)
        g1_amp = decay_amplitude(r.t + r.tau, BACKFLOW)
        worst["p_i"] = max(worst["p_i"],
                           abs(r.p_i - oracles.pi_dense(g0_amp, g1_amp)))
        worst["nm1"] = max(worst["nm1"], abs(
            r.nm1 - oracles.nm1_dense(2.0, 2.0, r.t, r.tau,
                                      cfg.family_min, cfg.family_max, cfg.lam)))
        worst["nm2"] = max(worst["nm2"], abs(
            r.nm2 - oracles.nm2_dense(2.0, 2.0, r.t, r.tau,
                                      cfg.family_min, cfg.family_max, cfg.lam)))
        worst["d"] = max(worst["d"], abs(
            r.d - oracles.d_dense(r.t + r.tau, cfg.family_min, cfg.family_max,
                                  cfg.lam)))
    ok = all(v <= 1e-3 for v in worst.values())
    _report("optimizer vs exhaustive search", ok,
            "worst deviations " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    for key, v in worst.items():
        assert v <= 1e-3, (key, v)


def test_metric_axioms():
    """Symmetry 1e-12, triangle 1e-10, contraction 1e-10 over 1000 samples."""
    rng = np.random.default_rng(99)
    worst_sym = 0.0
    worst_tri = -np.inf
    worst_con = -np.inf
    ratios = np.linspace(-1.0, 1.0, 11)
    for i in range(1000):
        r1 = random_density(rng, 2)
        r2 = random_density(rng, 2)
        r3 = random_density(rng, 2)
        d12 = trace_distance(r1, r2)
        worst_sym = max(worst_sym, abs(d12 - trace_distance(r2, r1)))
        worst_tri = max(worst_tri, trace_distance(r1, r3)
                        - (d12 + trace_distance(r2, r3)))
        g = float(ratios[i % ratios.size])
        worst_con = max(worst_con,
                        trace_distance(apply_ad(g, r1), apply_ad(g, r2)) - d12)
    ok = worst_sym <= 1e-12 and worst_tri <= 1e-10 and worst_con <= 1e-10
    _report("metric axioms", ok,
            f"symmetry {worst_sym:.1e}, triangle excess {worst_tri:.1e}, "
            f"contraction excess {worst_con:.1e}")
    assert worst_sym <= 1e-12
    assert worst_tri <= 1e-10
    assert worst_con <= 1e-10


def test_sweep_determinism(default_sweep):
    """Two default sweeps render byte-identical CSV."""
    cfg, records, _duration = default_sweep
    again = sweep(cfg)
    first = render_csv(records).encode()
    second = render_csv(again).encode()
    ok = first == second
    _report("sweep determinism", ok, f"{len(first)} bytes compared")
    assert first == second
