import math

import numpy as np
import pytest

from divlab import kernels
from divlab.channels import JCParams, choi_of, decay_amplitude, apply_ad, free_family
from divlab.measures import (
    OptConfig,
    _d_seed_family,
    _d_seed_grid,
    _family_interval,
    bloch_grid,
    cp_indivisibility,
    diameter_d,
    measure_point,
    nm1,
    nm2,
    p_indivisibility,
)
from divlab.qmat import BlochVector, bloch_to_state, trace_distance, trace_norm
import oracles

BACKFLOW = JCParams(2.0, 2.0)
DAMPED = JCParams(0.5, 2.0)
ZERO_T = 0.75 * math.pi

SMALL_OPT = OptConfig(grid_theta=10, grid_phi=6, grid_r=4,
                      refine_iters=150, gamma0_grid=21)
FAMILY = free_family(2.0, 0.01, 0.99, 21)
FAMILY_WITH_TARGET = free_family(2.0, 0.01, 0.99, 99)  # grid contains 0.50


class TestOptConfig:
    def test_defaults(self):
        opt = OptConfig()
        assert (opt.grid_theta, opt.grid_phi, opt.grid_r) == (24, 12, 8)
        assert opt.refine_iters == 200
        assert opt.tol == 1e-6
        assert opt.gamma0_grid == 99

    @pytest.mark.parametrize("kw", [
        {"grid_theta": 1}, {"grid_phi": 0}, {"grid_r": 1},
        {"gamma0_grid": 1}, {"tol": 0.0}, {"refine_iters": 0},
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            OptConfig(**kw)


class TestCpIndivisibility:
    def test_identity_interval(self):
        assert cp_indivisibility(BACKFLOW, 0.0, 1e-9) == 0.0

    def test_contractive_intervals_vanish(self):
        # 4x4 eigendecomposition of the Choi matrix stays unit trace norm
        for t in np.linspace(0.0, 4.0, 81):
            assert cp_indivisibility(DAMPED, float(t), 0.01) <= 1e-12

    def test_matches_closed_form_in_backflow(self):
        for t in np.linspace(2.4, 3.1, 36):
            g = oracles.interval_ratio(float(t), 0.01, 2.0, 2.0)
            val = cp_indivisibility(BACKFLOW, float(t), 0.01)
            assert abs(val - max(g * g - 1.0, 0.0)) <= 1e-9

    def test_expanding_ratio_value(self):
        # trace norm of the ratio-1.2 Choi matrix is 1.44
        assert abs(kernels.choi_trace_norm(1.2) - 1.0 - 0.44) < 1e-12

    def test_singular_interval_rejected(self):
        with pytest.raises(ValueError, match="null"):
            cp_indivisibility(BACKFLOW, ZERO_T, 0.01)


class TestPIndivisibility:
    def test_contractive_regime_is_exactly_zero(self):
        for t in (0.0, 0.5, 1.5, 3.0):
            assert p_indivisibility(DAMPED, t, 0.01, SMALL_OPT) == 0.0

    def test_vanishing_interval(self):
        assert p_indivisibility(BACKFLOW, 0.0, 1e-9, SMALL_OPT) <= 1e-12

    def test_backflow_matches_dense_pair_search(self):
        t, tau = 2.5, 0.01
        val = p_indivisibility(BACKFLOW, t, tau, SMALL_OPT)
        ref = oracles.pi_dense(decay_amplitude(t, BACKFLOW),
                               decay_amplitude(t + tau, BACKFLOW), n=10_000)
        assert val > 0.0
        assert abs(val - ref) < 1e-3

    def test_coarse_grid_refinement_stability(self):
        t, tau = 2.45, 0.01
        doubled = OptConfig(grid_theta=20, grid_phi=12, grid_r=8,
                            refine_iters=150, gamma0_grid=21)
        a = p_indivisibility(BACKFLOW, t, tau, SMALL_OPT)
        b = p_indivisibility(BACKFLOW, t, tau, doubled)
        assert abs(a - b) <= 1e-3


class TestNm1:
    def test_target_inside_family(self):
        assert nm1(DAMPED, FAMILY_WITH_TARGET, 1.0, 0.01, SMALL_OPT) <= 1e-6

    def test_vanishing_interval(self):
        assert nm1(BACKFLOW, FAMILY, 0.0, 1e-9, SMALL_OPT) <= 1e-6

    def test_backflow_matches_dense_grid(self):
        t, tau = 2.5, 0.01
        val = nm1(BACKFLOW, FAMILY, t, tau, SMALL_OPT)
        ref = oracles.nm1_dense(2.0, 2.0, t, tau, 0.01, 0.99, 2.0)
        assert abs(val - ref) < 1e-3

    def test_bounded_by_one(self):
        for t in (0.5, 2.45, 2.8):
            assert 0.0 <= nm1(BACKFLOW, FAMILY, t, 0.01, SMALL_OPT) <= 1.0

    def test_refinement_stability(self):
        doubled = OptConfig(grid_theta=20, grid_phi=12, grid_r=8,
                            refine_iters=150, gamma0_grid=21)
        a = nm1(BACKFLOW, FAMILY, 2.45, 0.01, SMALL_OPT)
        b = nm1(BACKFLOW, FAMILY, 2.45, 0.01, doubled)
        assert abs(a - b) <= 1e-3


class TestNm2:
    def test_target_inside_family(self):
        assert nm2(DAMPED, FAMILY_WITH_TARGET, 1.0, 0.01, SMALL_OPT) <= 1e-9

    def test_matches_dense_gamma_grid(self):
        for t in (0.8, 2.45, 2.5):
            val = nm2(BACKFLOW, FAMILY, t, 0.01, SMALL_OPT)
            ref = oracles.nm2_dense(2.0, 2.0, t, 0.01, 0.01, 0.99, 2.0)
            assert val > 0.0
            assert abs(val - ref) < 1e-6

    def test_contractive_target_bounded_by_one(self):
        # both Choi matrices are genuine states in the divisible regime
        mid = JCParams(0.95, 2.0)  # divisible but off the family grid
        for t in (0.3, 1.2, 3.0):
            assert nm2(mid, FAMILY, t, 0.01, SMALL_OPT) <= 1.0 + 1e-12


class TestDiameter:
    def test_single_member_family(self):
        fam = [JCParams(0.5, 2.0)]
        t, tau = 0.5, 0.01
        val = diameter_d(fam, t, tau, SMALL_OPT)
        ref = oracles.d_dense(t + tau, 0.5, 0.5, 2.0, n_gamma=1)
        assert abs(val - ref) < 1e-6

    def test_identical_states_cell_is_zero(self):
        # same family member acting on the same state contributes nothing
        e = decay_amplitude(0.51, JCParams(0.5, 2.0))
        rho = bloch_to_state(BlochVector(0.7, 1.1, 0.3))
        assert trace_distance(apply_ad(e, rho), apply_ad(e, rho)) == 0.0

    def test_bounded_by_one(self):
        for t in (0.0, 1.0, 4.0):
            assert diameter_d(FAMILY, t, 0.01, SMALL_OPT) <= 1.0 + 1e-12

    def test_matches_dense_grid(self):
        t, tau = 0.5, 0.01
        val = diameter_d(FAMILY, t, tau, SMALL_OPT)
        ref = oracles.d_dense(t + tau, 0.01, 0.99, 2.0)
        assert abs(val - ref) < 1e-3

    def test_monotone_under_family_refinement(self):
        vals = [diameter_d(free_family(2.0, 0.01, 0.99, n), 1.0, 0.01, SMALL_OPT)
                for n in (5, 9, 17)]
        assert vals[1] >= vals[0] - SMALL_OPT.tol
        assert vals[2] >= vals[1] - SMALL_OPT.tol


@pytest.fixture(scope="module")
def record():
    return measure_point(BACKFLOW, FAMILY, 2.45, 0.01, SMALL_OPT)


class TestOptimizerSoundness:
    """Reported optima dominate every coarse-grid evaluation."""

    T, TAU = 2.45, 0.01

    def test_pair_maximum_dominates_grid(self, record):
        coords, pop, cx, cy = bloch_grid(SMALL_OPT.grid_theta,
                                         SMALL_OPT.grid_phi, SMALL_OPT.grid_r)
        G0 = decay_amplitude(self.T, BACKFLOW)
        G1 = decay_amplitude(self.T + self.TAU, BACKFLOW)
        da = pop[:, None] - pop[None, :]
        c2 = (cx[:, None] - cx[None, :]) ** 2 + (cy[:, None] - cy[None, :]) ** 2
        vals = np.sqrt(G1 ** 4 * da ** 2 + G1 ** 2 * c2) \
            - np.sqrt(G0 ** 4 * da ** 2 + G0 ** 2 * c2)
        assert record.p_i_arg["raw"] >= vals.max() - 1e-12

    def test_nm1_maximum_dominates_grid(self, record):
        coords, pop, cx, cy = bloch_grid(SMALL_OPT.grid_theta,
                                         SMALL_OPT.grid_phi, SMALL_OPT.grid_r)
        G0 = decay_amplitude(self.T, BACKFLOW)
        g = decay_amplitude(self.T + self.TAU, BACKFLOW) / G0
        fam = _family_interval(FAMILY)
        inner = [kernels.nm1_inner_min(G0 * G0 * pop[i],
                                       G0 * G0 * (cx[i] ** 2 + cy[i] ** 2),
                                       g, self.T, self.TAU, fam.lam,
                                       fam.lo, fam.hi, fam.g0.size)[0]
                 for i in range(pop.size)]
        assert record.nm1 >= max(inner) - 1e-12

    def test_nm2_minimum_dominates_grid(self, record):
        G0 = decay_amplitude(self.T, BACKFLOW)
        g = decay_amplitude(self.T + self.TAU, BACKFLOW) / G0
        for p in FAMILY:
            gk = decay_amplitude(self.T + self.TAU, p) / decay_amplitude(self.T, p)
            assert record.nm2 <= kernels.choi_pair_distance(g, gk) + 1e-12

    def test_d_maximum_dominates_seed_grid(self, record):
        fam = _family_interval(FAMILY)
        coords, pop, cx, cy = _d_seed_grid(SMALL_OPT)
        idx = _d_seed_family(fam)
        es = np.array([kernels.decay_g(self.T + self.TAU, fam.g0[k], fam.lam)
                       for k in idx])
        best = 0.0
        for e1 in es:
            for e2 in es:
                da = e1 * e1 * pop[:, None] - e2 * e2 * pop[None, :]
                dx = e1 * cx[:, None] - e2 * cx[None, :]
                dy = e1 * cy[:, None] - e2 * cy[None, :]
                best = max(best, float(np.sqrt(da ** 2 + dx ** 2 + dy ** 2).max()))
        assert record.d >= best - 1e-12


class TestMeasurePoint:
    def test_singular_point_yields_null_record(self):
        rec = measure_point(BACKFLOW, FAMILY, ZERO_T, 0.01, SMALL_OPT)
        assert rec.singular
        for name in ("g", "p_i", "cp_i", "nm1", "nm2", "d"):
            assert getattr(rec, name) is None

    def test_regular_point_has_full_metadata(self):
        rec = measure_point(BACKFLOW, FAMILY, 2.45, 0.01, SMALL_OPT)
        assert not rec.singular
        for name in ("p_i", "cp_i", "nm1", "nm2", "d"):
            assert getattr(rec, name) >= 0.0
        assert rec.nm1 <= 1.0 and rec.d <= 1.0 + 1e-12
        assert abs(rec.cp_i - max(rec.g ** 2 - 1.0, 0.0)) <= 1e-9

    def test_reported_arguments_reproduce_values(self):
        t, tau = 2.45, 0.01
        rec = measure_point(BACKFLOW, FAMILY, t, tau, SMALL_OPT)
        G0 = decay_amplitude(t, BACKFLOW)
        G1 = decay_amplitude(t + tau, BACKFLOW)

        def state(arg):
            th, ph, r = arg
            return bloch_to_state(BlochVector(r=r, theta=th, phi=ph))

        # distance growth at the reported pair, via the channel surface
        r1 = state(rec.p_i_arg["rho1"])
        r2 = state(rec.p_i_arg["rho2"])
        grown = trace_distance(apply_ad(G1, r1), apply_ad(G1, r2)) \
            - trace_distance(apply_ad(G0, r1), apply_ad(G0, r2))
        assert abs(grown - rec.p_i_arg["raw"]) <= SMALL_OPT.tol
        assert rec.p_i == max(rec.p_i_arg["raw"], 0.0)

        # nm1 at the reported state and family member
        sigma = apply_ad(G0, state(rec.nm1_arg["rho"]))
        k = JCParams(rec.nm1_arg["gamma0"], 2.0)
        gk = decay_amplitude(t + tau, k) / decay_amplitude(t, k)
        dist = trace_distance(apply_ad(rec.g, sigma), apply_ad(gk, sigma))
        assert abs(dist - rec.nm1) <= SMALL_OPT.tol

        # nm2 at the reported family member
        k = JCParams(rec.nm2_arg["gamma0"], 2.0)
        gk = decay_amplitude(t + tau, k) / decay_amplitude(t, k)
        assert abs(0.5 * trace_norm(choi_of(rec.g) - choi_of(gk)) - rec.nm2) \
            <= SMALL_OPT.tol

        # diameter at the reported family pair and state pair
        e1 = decay_amplitude(t + tau, JCParams(rec.d_arg["gamma0_1"], 2.0))
        e2 = decay_amplitude(t + tau, JCParams(rec.d_arg["gamma0_2"], 2.0))
        dist = trace_distance(apply_ad(e1, state(rec.d_arg["rho1"])),
                              apply_ad(e2, state(rec.d_arg["rho2"])))
        assert abs(dist - rec.d) <= SMALL_OPT.tol

    def test_family_must_share_lambda(self):
        bad = [JCParams(0.2, 2.0), JCParams(0.3, 3.0)]
        with pytest.raises(ValueError, match="lambda"):
            measure_point(BACKFLOW, bad, 1.0, 0.01, SMALL_OPT)

    def test_family_must_be_nonempty(self):
        with pytest.raises(ValueError, match="non-empty"):
            measure_point(BACKFLOW, [], 1.0, 0.01, SMALL_OPT)
