"""Backend consistency: the numba loop kernels and their vectorized numpy
twins must agree on values and argmax/argmin choices."""

import math

import numpy as np
import pytest

from divlab import kernels
from divlab.kernels import (
    _d_pair_scan_loops,
    _d_pair_scan_numpy,
    _nm1_state_scan_loops,
    _nm1_state_scan_numpy,
    _pi_pair_scan_loops,
    _pi_pair_scan_numpy,
    decay_g,
    decay_g_np,
    jacobi_eigh,
)
from oracles import choi_pair_distance_analytic


@pytest.fixture
def states(rng):
    n = 160
    th = rng.uniform(0, np.pi, n)
    ph = rng.uniform(0, 2 * np.pi, n)
    r = rng.uniform(0, 1, n)
    pop = 0.5 * (1 + r * np.cos(th))
    cx = 0.5 * r * np.sin(th) * np.cos(ph)
    cy = 0.5 * r * np.sin(th) * np.sin(ph)
    return pop, cx, cy


def test_pi_scan_twins_agree(states):
    pop, cx, cy = states
    a = _pi_pair_scan_loops(pop, cx, cy, 0.49, 0.81)
    b = _pi_pair_scan_numpy(pop, cx, cy, 0.49, 0.81)
    assert abs(a[0] - b[0]) < 1e-13
    assert a[1:] == b[1:]


def test_nm1_scan_twins_agree(states):
    pop, cx, cy = states
    pt = 0.25 * pop
    ct2 = 0.25 * (cx * cx + cy * cy)
    args = (1.06, 2.4, 0.01, 2.0, 0.01, 0.99, 33)
    a = _nm1_state_scan_loops(pt, ct2, *args)
    b = _nm1_state_scan_numpy(pt, ct2, *args)
    assert abs(a[0] - b[0]) < 1e-12
    assert a[1] == b[1]
    assert abs(a[2] - b[2]) < 1e-9


def test_d_scan_twins_agree(states):
    pop, cx, cy = states
    es = np.linspace(0.15, 0.95, 7)
    a = _d_pair_scan_loops(pop, cx, cy, es)
    b = _d_pair_scan_numpy(pop, cx, cy, es)
    assert abs(a[0] - b[0]) < 1e-13
    assert a[1:] == b[1:]


def test_exported_scan_matches_a_twin(states):
    pop, cx, cy = states
    v = kernels.pi_pair_scan(pop, cx, cy, 0.3, 0.5)
    ref = _pi_pair_scan_numpy(pop, cx, cy, 0.3, 0.5)
    assert abs(v[0] - ref[0]) < 1e-13


def test_decay_g_np_matches_scalar():
    g0s = np.linspace(0.01, 3.0, 61)
    for t in (0.0, 0.3, 1.7, 4.2):
        vec = decay_g_np(t, g0s, 2.0)
        ref = np.array([decay_g(t, float(x), 2.0) for x in g0s])
        assert np.abs(vec - ref).max() < 1e-15


def test_decay_g_degenerate_branch_is_continuous():
    # gamma0 = lam/2 sits on the branch boundary
    lam = 2.0
    for t in (0.1, 1.0, 3.0):
        mid = decay_g(t, 1.0, lam)
        lo = decay_g(t, 1.0 - 1e-9, lam)
        hi = decay_g(t, 1.0 + 1e-9, lam)
        assert abs(mid - lo) < 1e-7
        assert abs(mid - hi) < 1e-7


def test_jacobi_handles_degenerate_spectra():
    w, v = jacobi_eigh(np.eye(4, dtype=complex) * 2.5)
    assert np.allclose(w, 2.5)
    assert np.abs(v.conj().T @ v - np.eye(4)).max() < 1e-12


def test_choi_pair_distance_matches_analytic_eigenvalues(rng):
    for _ in range(200):
        g = float(rng.uniform(-1.5, 3.5))
        gk = float(rng.uniform(0.0, 1.0))
        assert abs(kernels.choi_pair_distance(g, gk)
                   - choi_pair_distance_analytic(g, gk)) < 1e-12


def test_nm1_inner_min_against_dense_grid():
    t, tau, lam = 2.5, 0.01, 2.0
    g = decay_g(t + tau, 2.0, lam) / decay_g(t, 2.0, lam)
    p, c2 = 0.2, 0.03
    v, x = kernels.nm1_inner_min(p, c2, g, t, tau, lam, 0.01, 0.99, 99)
    g0s = np.linspace(0.01, 0.99, 20001)
    gks = decay_g_np(t + tau, g0s, lam) / decay_g_np(t, g0s, lam)
    dp = (g * g - gks * gks) * p
    dense = np.sqrt(dp * dp + (g - gks) ** 2 * c2).min()
    assert v <= dense + 1e-12
    assert abs(v - dense) < 1e-8
    assert 0.01 <= x <= 0.99


def test_nm1_inner_min_single_member_family():
    t, tau, lam = 1.0, 0.01, 2.0
    g = decay_g(t + tau, 2.0, lam) / decay_g(t, 2.0, lam)
    v, x = kernels.nm1_inner_min(0.3, 0.05, g, t, tau, lam, 0.5, 0.5, 1)
    gk = decay_g(t + tau, 0.5, lam) / decay_g(t, 0.5, lam)
    assert abs(v - kernels.ad_pair_distance(0.3, 0.05, g, gk)) < 1e-15
    assert x == 0.5


def test_rk4_lands_exactly_on_t_end():
    ts, gs, _ = kernels.rk4_decay(0.5, 2.0, math.pi / 4, 1e-4, 1e6)
    assert ts[-1] == pytest.approx(math.pi / 4, abs=1e-15)
    assert gs.shape == ts.shape
