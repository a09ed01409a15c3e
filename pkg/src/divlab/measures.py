"""Channel measures over a finite interval [t, t+tau]:

- distance-growth maximization over state pairs (positivity-indivisibility),
- Choi trace-norm excess (complete-positivity indivisibility),
- worst-case output distance to the free family (nm1),
- Choi distance to the free family (nm2),
- diameter of the free family's output set (d).

State optimizations run over the full Bloch ball (theta, phi, r): coarse
grid seeding followed by Nelder-Mead refinement. Family minimizations are
one-dimensional in gamma0: grid scan plus golden-section refinement between
the bracketing grid points. All optimizers are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, optimize
from .channels import JCParams, SINGULARITY_FLOOR, interval_map

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptConfig:
    """Optimizer settings: Bloch coarse-grid counts, refinement budget,
    objective tolerance and the default free-family grid size.
    """

    grid_theta: int = 24
    grid_phi: int = 12
    grid_r: int = 8
    refine_iters: int = 200
    tol: float = 1e-6
    gamma0_grid: int = 99

    def __post_init__(self) -> None:
        for name in ("grid_theta", "grid_phi", "grid_r", "gamma0_grid"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2, got {getattr(self, name)}")
        if self.refine_iters < 1:
            raise ValueError(f"refine_iters must be positive, got {self.refine_iters}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass
class MeasureRecord:
    """All measures evaluated at one (t, tau); singular intervals carry None
    in every metric field.
    """

    t: float
    tau: float
    singular: bool
    g: Optional[float]
    p_i: Optional[float]
    cp_i: Optional[float]
    nm1: Optional[float]
    nm2: Optional[float]
    d: Optional[float]
    p_i_arg: Optional[dict] = None
    nm1_arg: Optional[dict] = None
    nm2_arg: Optional[dict] = None
    d_arg: Optional[dict] = None


# ---------------------------------------------------------------------------
# Bloch grids and state helpers
# ---------------------------------------------------------------------------

def bloch_grid(n_theta: int, n_phi: int, n_r: int):
    """Flattened Bloch-ball grid in C order (theta major, then phi, then r).

    Returns (coords, pop, cx, cy): coords is (N, 3) of (theta, phi, r);
    pop is the excited population and (cx, cy) the coherence components.
    """
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    rs = np.linspace(0.0, 1.0, n_r)
    T, P, R = np.meshgrid(thetas, phis, rs, indexing="ij")
    coords = np.stack([T.ravel(), P.ravel(), R.ravel()], axis=1)
    pop = 0.5 * (1.0 + coords[:, 2] * np.cos(coords[:, 0]))
    sin_t = coords[:, 2] * np.sin(coords[:, 0])
    cx = 0.5 * sin_t * np.cos(coords[:, 1])
    cy = 0.5 * sin_t * np.sin(coords[:, 1])
    return coords, pop, cx, cy


def _clamp_state(th: float, ph: float, r: float) -> tuple[float, float, float]:
    th = min(max(th, 0.0), math.pi)
    ph = ph % TWO_PI
    if ph >= TWO_PI:  # tiny negative inputs can wrap onto the period itself
        ph = 0.0
    r = min(max(r, 0.0), 1.0)
    return th, ph, r


def _state_pcc(th: float, ph: float, r: float) -> tuple[float, float, float]:
    pop = 0.5 * (1.0 + r * math.cos(th))
    s = 0.5 * r * math.sin(th)
    return pop, s * math.cos(ph), s * math.sin(ph)


# ---------------------------------------------------------------------------
# Interval context shared by the measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _FamilyInterval:
    g0: np.ndarray          # gamma0 grid points, ascending
    lam: float
    lo: float
    hi: float


def _family_interval(family: Sequence[JCParams]) -> _FamilyInterval:
    if len(family) == 0:
        raise ValueError("free family must be non-empty")
    lams = {p.lam for p in family}
    if len(lams) != 1:
        raise ValueError(f"free family must share a single lambda, got {sorted(lams)}")
    g0 = np.array(sorted(p.gamma0 for p in family), dtype=float)
    return _FamilyInterval(g0=g0, lam=float(family[0].lam),
                           lo=float(g0[0]), hi=float(g0[-1]))


@dataclass(frozen=True)
class _IntervalContext:
    params: JCParams
    t: float
    tau: float
    g: float                 # survival ratio of the interval map
    G0: float                # G(t)
    G1: float                # G(t + tau)
    fam: _FamilyInterval
    gk: np.ndarray           # family interval ratios G_K(t+tau)/G_K(t)


def _build_context(params: JCParams, family: Sequence[JCParams], t: float,
                   tau: float, floor: float) -> Optional[_IntervalContext]:
    ratio = interval_map(t, tau, params, floor)
    if ratio.singular:
        return None
    fam = _family_interval(family)
    gk = np.array([
        kernels.decay_g(t + tau, g0, fam.lam) / kernels.decay_g(t, g0, fam.lam)
        for g0 in fam.g0
    ])
    G0 = kernels.decay_g(t, params.gamma0, params.lam)
    G1 = kernels.decay_g(t + tau, params.gamma0, params.lam)
    return _IntervalContext(params=params, t=t, tau=tau, g=ratio.g,
                            G0=G0, G1=G1, fam=fam, gk=gk)


# ---------------------------------------------------------------------------
# Distance growth over state pairs
# ---------------------------------------------------------------------------

def _pi_objective(G0: float, G1: float):
    g0sq = G0 * G0
    g1sq = G1 * G1

    def value(x: np.ndarray) -> float:
        th1, ph1, r1 = _clamp_state(x[0], x[1], x[2])
        th2, ph2, r2 = _clamp_state(x[3], x[4], x[5])
        p1, cx1, cy1 = _state_pcc(th1, ph1, r1)
        p2, cx2, cy2 = _state_pcc(th2, ph2, r2)
        da = p1 - p2
        c2 = (cx1 - cx2) ** 2 + (cy1 - cy2) ** 2
        return math.sqrt(g1sq * g1sq * da * da + g1sq * c2) \
            - math.sqrt(g0sq * g0sq * da * da + g0sq * c2)

    return value


_PAIR_SEEDS = (
    # equatorial antipodal pure pair, maximal coherence difference
    np.array([math.pi / 2, 0.0, 1.0, math.pi / 2, math.pi, 1.0]),
    # polar pure pair, maximal population difference
    np.array([0.0, 0.0, 1.0, math.pi, 0.0, 1.0]),
)
_PAIR_STEPS = np.array([0.2, 0.4, 0.15, 0.2, 0.4, 0.15])


def _p_i_optimize(ctx: _IntervalContext, opt: OptConfig) -> tuple[float, dict]:
    coords, pop, cx, cy = bloch_grid(opt.grid_theta, opt.grid_phi, opt.grid_r)
    best, bi, bj = kernels.pi_pair_scan(pop, cx, cy, ctx.G0 * ctx.G0, ctx.G1 * ctx.G1)
    objective = _pi_objective(ctx.G0, ctx.G1)
    seeds = [np.concatenate([coords[bi], coords[bj]])]
    seeds.extend(_PAIR_SEEDS)
    best_x = seeds[0]
    for seed in seeds:
        x, negv = optimize.nelder_mead(lambda v: -objective(v), seed, _PAIR_STEPS,
                                       max_iter=opt.refine_iters)
        if -negv > best:
            best = -negv
            best_x = x
    s1 = _clamp_state(best_x[0], best_x[1], best_x[2])
    s2 = _clamp_state(best_x[3], best_x[4], best_x[5])
    arg = {"rho1": list(s1), "rho2": list(s2), "raw": best}
    return max(best, 0.0), arg


# ---------------------------------------------------------------------------
# Choi trace-norm excess
# ---------------------------------------------------------------------------

def _cp_i_value(g: float) -> float:
    return max(kernels.choi_trace_norm(g) - 1.0, 0.0)


# ---------------------------------------------------------------------------
# Worst-case output distance to the free family
# ---------------------------------------------------------------------------

def _nm1_objective(ctx: _IntervalContext, n_inner: int):
    g0sq = ctx.G0 * ctx.G0

    def value_arg(x: np.ndarray) -> tuple[float, float]:
        th, ph, r = _clamp_state(x[0], x[1], x[2])
        pop, cxv, cyv = _state_pcc(th, ph, r)
        pt = g0sq * pop
        ct2 = g0sq * (cxv * cxv + cyv * cyv)
        return kernels.nm1_inner_min(pt, ct2, ctx.g, ctx.t, ctx.tau, ctx.fam.lam,
                                     ctx.fam.lo, ctx.fam.hi, n_inner)

    return value_arg


_STATE_SEEDS = (
    np.array([math.pi / 2, 0.0, 1.0]),   # equatorial pure state
    np.array([0.0, 0.0, 1.0]),           # excited pole
)
_STATE_STEPS = np.array([0.2, 0.4, 0.15])


def _nm1_optimize(ctx: _IntervalContext, opt: OptConfig) -> tuple[float, dict]:
    coords, pop, cx, cy = bloch_grid(opt.grid_theta, opt.grid_phi, opt.grid_r)
    g0sq = ctx.G0 * ctx.G0
    pt = g0sq * pop
    ct2 = g0sq * (cx * cx + cy * cy)
    n_inner = ctx.fam.g0.size
    best, bi, bg0 = kernels.nm1_state_scan(pt, ct2, ctx.g, ctx.t, ctx.tau,
                                           ctx.fam.lam, ctx.fam.lo, ctx.fam.hi,
                                           n_inner)
    value_arg = _nm1_objective(ctx, n_inner)
    best_x = coords[bi]
    best_g0 = bg0
    for seed in [coords[bi]] + list(_STATE_SEEDS):
        x, negv = optimize.nelder_mead(lambda v: -value_arg(v)[0], seed,
                                       _STATE_STEPS, max_iter=opt.refine_iters)
        if -negv > best:
            best = -negv
            best_x = x
            best_g0 = value_arg(x)[1]
    th, ph, r = _clamp_state(best_x[0], best_x[1], best_x[2])
    return best, {"rho": [th, ph, r], "gamma0": best_g0}


# ---------------------------------------------------------------------------
# Choi distance to the free family
# ---------------------------------------------------------------------------

def _nm2_optimize(ctx: _IntervalContext) -> tuple[float, dict]:
    t, tau, lam = ctx.t, ctx.tau, ctx.fam.lam

    def objective(g0: float) -> float:
        gkv = kernels.decay_g(t + tau, g0, lam) / kernels.decay_g(t, g0, lam)
        return kernels.choi_pair_distance(ctx.g, gkv)

    vals = np.array([kernels.choi_pair_distance(ctx.g, gkv) for gkv in ctx.gk])
    i = int(vals.argmin())
    best = float(vals[i])
    best_g0 = float(ctx.fam.g0[i])
    lo = float(ctx.fam.g0[max(i - 1, 0)])
    hi = float(ctx.fam.g0[min(i + 1, ctx.fam.g0.size - 1)])
    if hi > lo:
        x, f = optimize.golden_section_min(objective, lo, hi)
        if f < best:
            best = f
            best_g0 = x
    return best, {"gamma0": best_g0}


# ---------------------------------------------------------------------------
# Diameter of the free family's output set
# ---------------------------------------------------------------------------

def _d_seed_grid(opt: OptConfig):
    """Reduced state grid for pair scans over the family, derived from the
    configured coarse counts.
    """
    n_theta = max(4, opt.grid_theta // 3)
    n_phi = max(3, opt.grid_phi // 3)
    n_r = max(3, opt.grid_r // 3 + 1)
    return bloch_grid(n_theta, n_phi, n_r)


def _d_seed_family(fam: _FamilyInterval, limit: int = 13) -> np.ndarray:
    n = fam.g0.size
    if n <= limit:
        return np.arange(n)
    return np.unique(np.round(np.linspace(0, n - 1, limit)).astype(int))


def _d_objective(fam: _FamilyInterval, t_end: float):
    def value(x: np.ndarray) -> float:
        g0a = min(max(x[0], fam.lo), fam.hi)
        g0b = min(max(x[1], fam.lo), fam.hi)
        e1 = kernels.decay_g(t_end, g0a, fam.lam)
        e2 = kernels.decay_g(t_end, g0b, fam.lam)
        th1, ph1, r1 = _clamp_state(x[2], x[3], x[4])
        th2, ph2, r2 = _clamp_state(x[5], x[6], x[7])
        p1, cx1, cy1 = _state_pcc(th1, ph1, r1)
        p2, cx2, cy2 = _state_pcc(th2, ph2, r2)
        da = e1 * e1 * p1 - e2 * e2 * p2
        dx = e1 * cx1 - e2 * cx2
        dy = e1 * cy1 - e2 * cy2
        return math.sqrt(da * da + dx * dx + dy * dy)

    return value


_D_STEPS = np.array([0.05, 0.05, 0.2, 0.4, 0.15, 0.2, 0.4, 0.15])


def _d_optimize(fam: _FamilyInterval, t: float, tau: float,
                opt: OptConfig) -> tuple[float, dict]:
    t_end = t + tau
    coords, pop, cx, cy = _d_seed_grid(opt)
    fam_idx = _d_seed_family(fam)
    es = np.array([kernels.decay_g(t_end, fam.g0[k], fam.lam) for k in fam_idx])
    best, ba, bb, bi, bj = kernels.d_pair_scan(pop, cx, cy, es)
    objective = _d_objective(fam, t_end)
    seed0 = np.concatenate([
        [fam.g0[fam_idx[ba]], fam.g0[fam_idx[bb]]], coords[bi], coords[bj]])
    seeds = [
        seed0,
        np.concatenate([[fam.lo, fam.hi], _PAIR_SEEDS[1]]),
        np.concatenate([[fam.lo, fam.hi], _PAIR_SEEDS[0]]),
    ]
    best_x = seed0
    for seed in seeds:
        x, negv = optimize.nelder_mead(lambda v: -objective(v), seed, _D_STEPS,
                                       max_iter=opt.refine_iters)
        if -negv > best:
            best = -negv
            best_x = x
    arg = {
        "gamma0_1": min(max(best_x[0], fam.lo), fam.hi),
        "gamma0_2": min(max(best_x[1], fam.lo), fam.hi),
        "rho1": list(_clamp_state(best_x[2], best_x[3], best_x[4])),
        "rho2": list(_clamp_state(best_x[5], best_x[6], best_x[7])),
    }
    return best, arg


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _require_context(ctx: Optional[_IntervalContext]) -> _IntervalContext:
    if ctx is None:
        raise ValueError(
            "interval map is singular at this (t, tau); the record is null"
        )
    return ctx


def p_indivisibility(params: JCParams, t: float, tau: float,
                     opt: Optional[OptConfig] = None,
                     floor: float = SINGULARITY_FLOOR) -> float:
    """Largest trace-distance growth over the interval; 0 for contractive maps."""
    opt = opt or OptConfig()
    fam = [params]  # context needs a family; the growth measure ignores it
    ctx = _require_context(_build_context(params, fam, t, tau, floor))
    return _p_i_optimize(ctx, opt)[0]


def cp_indivisibility(params: JCParams, t: float, tau: float,
                      floor: float = SINGULARITY_FLOOR) -> float:
    """Trace norm of the interval map's Choi matrix, minus one."""
    ratio = interval_map(t, tau, params, floor)
    if ratio.singular:
        raise ValueError(
            "interval map is singular at this (t, tau); the record is null"
        )
    return _cp_i_value(ratio.g)


def nm1(params: JCParams, family: Sequence[JCParams], t: float, tau: float,
        opt: Optional[OptConfig] = None,
        floor: float = SINGULARITY_FLOOR) -> float:
    """max over states of the min over the family of the output distance."""
    opt = opt or OptConfig()
    ctx = _require_context(_build_context(params, family, t, tau, floor))
    return _nm1_optimize(ctx, opt)[0]


def nm2(params: JCParams, family: Sequence[JCParams], t: float, tau: float,
        opt: Optional[OptConfig] = None,
        floor: float = SINGULARITY_FLOOR) -> float:
    """min over the family of the Choi-matrix trace distance."""
    opt = opt or OptConfig()
    ctx = _require_context(_build_context(params, family, t, tau, floor))
    return _nm2_optimize(ctx)[0]


def diameter_d(family: Sequence[JCParams], t: float, tau: float,
               opt: Optional[OptConfig] = None) -> float:
    """Largest output distance between any two family maps on any two states."""
    opt = opt or OptConfig()
    fam = _family_interval(family)
    return _d_optimize(fam, t, tau, opt)[0]


def measure_point(params: JCParams, family: Sequence[JCParams], t: float,
                  tau: float, opt: Optional[OptConfig] = None,
                  floor: float = SINGULARITY_FLOOR) -> MeasureRecord:
    """Evaluate every measure at one (t, tau); singular intervals yield a
    null record with the singular flag set.
    """
    opt = opt or OptConfig()
    ctx = _build_context(params, family, t, tau, floor)
    if ctx is None:
        return MeasureRecord(t=t, tau=tau, singular=True, g=None, p_i=None,
                             cp_i=None, nm1=None, nm2=None, d=None)
    p_i, p_i_arg = _p_i_optimize(ctx, opt)
    cp_i = _cp_i_value(ctx.g)
    nm1_v, nm1_arg = _nm1_optimize(ctx, opt)
    nm2_v, nm2_arg = _nm2_optimize(ctx)
    d_v, d_arg = _d_optimize(ctx.fam, t, tau, opt)
    return MeasureRecord(t=t, tau=tau, singular=False, g=ctx.g, p_i=p_i,
                         cp_i=cp_i, nm1=nm1_v, nm2=nm2_v, d=d_v,
                         p_i_arg=p_i_arg, nm1_arg=nm1_arg, nm2_arg=nm2_arg,
                         d_arg=d_arg)
