"""The resonant Jaynes-Cummings channel family.

Reduced single-qubit dynamics: an amplitude-damping map whose survival
amplitude G(t) obeys G' = -gamma(t) G / 2 with a time-dependent decay rate

    gamma(t) = 2 lam g0 sinh(d t/2) / (d cosh(d t/2) + lam sinh(d t/2)),
    d = sqrt(lam^2 - 2 g0 lam),

with trigonometric branches when d^2 < 0. For gamma0 < lam/2 the rate stays
nonnegative and the dynamics is divisible; for gamma0 > lam/2 the rate turns
negative in windows (information backflow) and G has isolated zeros where
the interval map is undefined.

Also provides the Choi construction for interval maps and an independent
RK4 integrator of the master equation used to cross-check the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels, qmat

SINGULARITY_FLOOR = 1e-8
GAMMA_DENOM_FLOOR = 1e-12
GAMMA_CLAMP = 1e6


class SingularTimeError(ValueError):
    """Decay rate requested at (or numerically within) a pole."""

    def __init__(self, t: float, denominator: float):
        self.t = t
        self.denominator = denominator
        super().__init__(
            f"decay rate singular at t={t!r}: denominator {denominator:.3e} "
            f"below floor {GAMMA_DENOM_FLOOR:.1e}"
        )


@dataclass(frozen=True)
class JCParams:
    """Decay-rate parameters (gamma0, lambda), both strictly positive."""

    gamma0: float
    lam: float

    def __post_init__(self) -> None:
        if not self.gamma0 > 0.0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def delta2(self) -> float:
        """lam^2 - 2*gamma0*lam; its sign selects the dynamical regime."""
        return self.lam * self.lam - 2.0 * self.gamma0 * self.lam

    @property
    def markovian(self) -> bool:
        return self.gamma0 < 0.5 * self.lam


@dataclass(frozen=True)
class SurvivalRatio:
    """Amplitude-damping parameter g of an interval map Lambda(t+tau, t).

    ``singular`` marks intervals starting where |G(t)| is below the
    singularity floor, at which the ratio is numerically undefined.
    """

    g: float
    singular: bool = False

    def __float__(self) -> float:
        return self.g


@dataclass(frozen=True)
class LindbladTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    clamped: bool


def decay_amplitude(t: float, p: JCParams) -> float:
    """Closed-form survival amplitude G(t), G(0) = 1."""
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return kernels.decay_g(t, p.gamma0, p.lam)


def decay_rate(t: float, p: JCParams) -> float:
    """Time-dependent decay rate gamma(t); negative values signal backflow."""
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    num, den = kernels.decay_gamma_parts(t, p.gamma0, p.lam)
    if abs(den) < GAMMA_DENOM_FLOOR:
        raise SingularTimeError(t, abs(den))
    return num / den


def interval_map(t: float, tau: float, p: JCParams,
                 floor: float = SINGULARITY_FLOOR) -> SurvivalRatio:
    """Survival ratio g = G(t+tau)/G(t) of the map from t to t+tau.

    Never raises: if |G(t)| is below ``floor`` the result carries the
    singular flag and callers emit a null record.
    """
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    g_start = kernels.decay_g(t, p.gamma0, p.lam)
    if abs(g_start) < floor:
        return SurvivalRatio(g=float("nan"), singular=True)
    return SurvivalRatio(g=kernels.decay_g(t + tau, p.gamma0, p.lam) / g_start)


def _ratio_value(g: Union[SurvivalRatio, float]) -> float:
    if isinstance(g, SurvivalRatio):
        if g.singular:
            raise ValueError(
                "interval map is singular (|G(t)| below the floor); "
                "skip this record instead of applying the map"
            )
        return g.g
    return float(g)


def apply_ad(g: Union[SurvivalRatio, float], rho: np.ndarray) -> np.ndarray:
    """Apply the amplitude-damping map with survival ratio g to a qubit state.

    Excited population scales by g^2, coherences by g, and the ground
    population takes the remainder so the trace is preserved.
    """
    gv = _ratio_value(g)
    rho = qmat.assert_density(rho)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 state, got {rho.shape}")
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = gv * gv * rho[0, 0]
    out[0, 1] = gv * rho[0, 1]
    out[1, 0] = gv * rho[1, 0]
    out[1, 1] = rho[1, 1] + (1.0 - gv * gv) * rho[0, 0]
    return out


def choi_of(g: Union[SurvivalRatio, float]) -> np.ndarray:
    """Choi matrix (map acting on the first factor of a maximally entangled
    pair). Hermitian with unit trace; PSD exactly when |g| <= 1.
    """
    return kernels.choi_matrix(_ratio_value(g))


def integrate_lindblad(p: JCParams, t_end: float, dt: float = 1e-4) -> LindbladTrajectory:
    """RK4 trajectory of G' = -gamma(t) G / 2, the oracle for the closed form.

    gamma is clamped to |gamma| <= 1e6 near poles; the ``clamped`` flag marks
    trajectories whose tail crossed such a window and should not be trusted.
    """
    if t_end < 0.0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    if not 0.0 < dt <= 1e-3:
        raise ValueError(f"dt must lie in (0, 1e-3], got {dt}")
    if t_end == 0.0:
        return LindbladTrajectory(np.zeros(1), np.ones(1), False)
    times, vals, clamped = kernels.rk4_decay(p.gamma0, p.lam, t_end, dt, GAMMA_CLAMP)
    return LindbladTrajectory(times, vals, bool(clamped))


def free_family(lambda_fixed: float, gamma0_min: float, gamma0_max: float,
                n: int) -> list[JCParams]:
    """Uniform gamma0 grid of divisible-regime channels (gamma0 < lambda/2).

    These are the free operations; admitting gamma0 >= lambda/2 would let
    resourceful maps into the family, so the range is rejected outright.
    """
    if n < 2:
        raise ValueError(f"family needs at least 2 members, got n={n}")
    if not 0.0 < gamma0_min < gamma0_max:
        raise ValueError(
            f"need 0 < gamma0_min < gamma0_max, got ({gamma0_min}, {gamma0_max})"
        )
    if not gamma0_max < 0.5 * lambda_fixed:
        raise ValueError(
            f"gamma0_max={gamma0_max} violates the divisibility constraint "
            f"gamma0 < lambda/2 = {0.5 * lambda_fixed}"
        )
    grid = np.linspace(gamma0_min, gamma0_max, n)
    return [JCParams(gamma0=float(g0), lam=float(lambda_fixed)) for g0 in grid]
