"""Derivative-free optimizers: Nelder-Mead simplex and golden-section search.

Both are deterministic for fixed inputs; the objectives they refine are
smooth and low-dimensional, so no gradients or restarts with randomness are
needed.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

_INVPHI = 0.6180339887498949


def nelder_mead(
    func: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float],
    max_iter: int = 200,
    ftol: float = 1e-14,
    xtol: float = 1e-11,
) -> tuple[np.ndarray, float]:
    """Minimize ``func`` from ``x0`` with per-coordinate initial steps.

    Runs up to ``max_iter`` iterations, stopping early only once both the
    simplex value spread and its coordinate spread are tiny; objective calls
    are cheap here so we favor convergence depth over early exit.
    """
    x0 = np.asarray(x0, dtype=float)
    steps = np.asarray(steps, dtype=float)
    dim = x0.size
    pts = [x0.copy()]
    for i in range(dim):
        x = x0.copy()
        x[i] += steps[i]
        pts.append(x)
    vals = [func(p) for p in pts]
    order = sorted(range(dim + 1), key=lambda k: vals[k])
    pts = [pts[k] for k in order]
    vals = [vals[k] for k in order]

    alpha, gamma, beta, sigma = 1.0, 2.0, 0.5, 0.5
    for _ in range(max_iter):
        spread = vals[-1] - vals[0]
        width = max(np.abs(p - pts[0]).max() for p in pts[1:])
        if spread < ftol and width < xtol:
            break
        centroid = np.mean(pts[:-1], axis=0)
        xr = centroid + alpha * (centroid - pts[-1])
        fr = func(xr)
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
        elif fr < vals[0]:
            xe = centroid + gamma * (centroid - pts[-1])
            fe = func(xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
        else:
            xc = centroid + beta * (pts[-1] - centroid)
            fc = func(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
            else:
                for k in range(1, dim + 1):
                    pts[k] = pts[0] + sigma * (pts[k] - pts[0])
                    vals[k] = func(pts[k])
        order = sorted(range(dim + 1), key=lambda k: vals[k])
        pts = [pts[k] for k in order]
        vals = [vals[k] for k in order]
    return pts[0], vals[0]


def golden_section_min(
    func: Callable[[float], float],
    a: float,
    b: float,
    max_iter: int = 80,
    xtol: float = 1e-13,
) -> tuple[float, float]:
    """Minimize a scalar function on [a, b], returning the best point seen
    (including the endpoints, so boundary minima are hit exactly).
    """
    best_x, best_f = a, func(a)
    fb = func(b)
    if fb < best_f:
        best_x, best_f = b, fb
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = func(x1)
    f2 = func(x2)
    for _ in range(max_iter):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = func(x2)
        if b - a < xtol:
            break
    for x, f in ((x1, f1), (x2, f2)):
        if f < best_f:
            best_x, best_f = x, f
    return best_x, best_f
