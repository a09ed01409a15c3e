"""Time-grid sweeps evaluating every measure and checking the two bridging
inequalities:

    lhs_p  = P_I   <=  rhs_p  = 2*NM1 + d        (ok_p)
    lhs_cp = NM2   <=  rhs_cp = CP_I/2 + 1       (ok_cp)

plus the informational strict comparison P_I <= 2*NM1 (ok_p_strict). Records
at singular grid points keep null metrics and null verdicts.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channels import JCParams, free_family
from .measures import MeasureRecord, OptConfig, measure_point

VERDICT_SLACK = 1e-9


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs: channel parameters, interval width, time
    grid, free family bounds, optimizer settings and output location.
    """

    gamma0: float = 2.0
    lam: float = 2.0
    tau: float = 0.01
    t_min: float = 0.0
    t_max: float = 5.0
    dt: float = 0.01
    family_min: float = 0.01
    family_max: float = 0.99
    family_n: int = 99
    opt: OptConfig = field(default_factory=OptConfig)
    out_dir: str = "out"
    seed: int = 0

    def validate(self) -> None:
        self.params()
        if self.t_min < 0.0:
            raise ValueError(f"t_min must be nonnegative, got {self.t_min}")
        if self.t_max < self.t_min:
            raise ValueError(f"t_max={self.t_max} below t_min={self.t_min}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        self.family()  # enforces the divisibility constraint

    def params(self) -> JCParams:
        return JCParams(gamma0=self.gamma0, lam=self.lam)

    def family(self) -> list[JCParams]:
        return free_family(self.lam, self.family_min, self.family_max, self.family_n)

    def time_grid(self) -> np.ndarray:
        n = int(np.floor((self.t_max - self.t_min) / self.dt + 1e-9)) + 1
        return self.t_min + self.dt * np.arange(n)


@dataclass
class VerdictRecord:
    """A MeasureRecord plus both inequality sides and their verdicts."""

    t: float
    tau: float
    gamma0: float
    lam: float
    singular: bool
    g: Optional[float]
    p_i: Optional[float]
    cp_i: Optional[float]
    nm1: Optional[float]
    nm2: Optional[float]
    d: Optional[float]
    lhs_p: Optional[float]
    rhs_p: Optional[float]
    ok_p: Optional[bool]
    ok_p_strict: Optional[bool]
    lhs_cp: Optional[float]
    rhs_cp: Optional[float]
    ok_cp: Optional[bool]
    p_i_arg: Optional[dict] = None
    nm1_arg: Optional[dict] = None
    nm2_arg: Optional[dict] = None
    d_arg: Optional[dict] = None

    @classmethod
    def from_measure(cls, rec: MeasureRecord, params: JCParams) -> "VerdictRecord":
        if rec.singular:
            return cls(t=rec.t, tau=rec.tau, gamma0=params.gamma0, lam=params.lam,
                       singular=True, g=None, p_i=None, cp_i=None, nm1=None,
                       nm2=None, d=None, lhs_p=None, rhs_p=None, ok_p=None,
                       ok_p_strict=None, lhs_cp=None, rhs_cp=None, ok_cp=None)
        lhs_p = rec.p_i
        rhs_p = 2.0 * rec.nm1 + rec.d
        lhs_cp = rec.nm2
        rhs_cp = 0.5 * rec.cp_i + 1.0
        return cls(
            t=rec.t, tau=rec.tau, gamma0=params.gamma0, lam=params.lam,
            singular=False, g=rec.g, p_i=rec.p_i, cp_i=rec.cp_i, nm1=rec.nm1,
            nm2=rec.nm2, d=rec.d,
            lhs_p=lhs_p, rhs_p=rhs_p,
            ok_p=bool(lhs_p <= rhs_p + VERDICT_SLACK),
            ok_p_strict=bool(lhs_p <= 2.0 * rec.nm1 + VERDICT_SLACK),
            lhs_cp=lhs_cp, rhs_cp=rhs_cp,
            ok_cp=bool(lhs_cp <= rhs_cp + VERDICT_SLACK),
            p_i_arg=rec.p_i_arg, nm1_arg=rec.nm1_arg, nm2_arg=rec.nm2_arg,
            d_arg=rec.d_arg,
        )


def _worker_count() -> int:
    cap = os.environ.get("DIVLAB_THREADS", "").strip()
    available = os.cpu_count() or 1
    if not cap:
        return available
    try:
        n = int(cap)
    except ValueError as exc:
        raise ValueError(f"DIVLAB_THREADS must be an integer, got {cap!r}") from exc
    return max(1, min(n, available))


def _compute_one(args: tuple) -> VerdictRecord:
    cfg, t = args
    rec = measure_point(cfg.params(), cfg.family(), float(t), cfg.tau, cfg.opt)
    return VerdictRecord.from_measure(rec, cfg.params())


def sweep(cfg: SweepConfig) -> list[VerdictRecord]:
    """Evaluate one VerdictRecord per grid point, in increasing t.

    Records are independent, so they may be computed by a process pool;
    DIVLAB_THREADS caps the worker count (absent means all available).
    """
    cfg.validate()
    ts = cfg.time_grid()
    workers = _worker_count()
    jobs = [(cfg, float(t)) for t in ts]
    if workers > 1 and len(jobs) >= 4 * workers:
        chunk = max(1, len(jobs) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_compute_one, jobs, chunksize=chunk))
    else:
        records = [_compute_one(j) for j in jobs]
    return records


def verify(records: Sequence[VerdictRecord]) -> dict:
    """Pass/fail/singular tallies, worst margins and violation locations."""
    if not records:
        raise ValueError("verify needs a non-empty record list")
    n_singular = sum(1 for r in records if r.singular)
    out = {
        "n_records": len(records),
        "n_singular": n_singular,
    }
    for key, lhs_name, rhs_name, ok_name in (
        ("p", "lhs_p", "rhs_p", "ok_p"),
        ("cp", "lhs_cp", "rhs_cp", "ok_cp"),
    ):
        n_pass = 0
        n_fail = 0
        worst_margin = None
        worst_t = None
        violations = []
        for r in records:
            ok = getattr(r, ok_name)
            if ok is None:
                continue
            margin = getattr(r, rhs_name) - getattr(r, lhs_name)
            if worst_margin is None or margin < worst_margin:
                worst_margin = margin
                worst_t = r.t
            if ok:
                n_pass += 1
            else:
                n_fail += 1
                violations.append(r.t)
        out[key] = {
            "n_pass": n_pass,
            "n_fail": n_fail,
            "worst_margin": worst_margin,
            "worst_t": worst_t,
            "violations": violations,
        }
    n_strict_fail = sum(
        1 for r in records if r.ok_p_strict is not None and not r.ok_p_strict)
    out["p_strict"] = {
        "n_fail": n_strict_fail,
        "violations": [r.t for r in records
                       if r.ok_p_strict is not None and not r.ok_p_strict],
    }
    out["ok"] = out["p"]["n_fail"] == 0 and out["cp"]["n_fail"] == 0
    return out
