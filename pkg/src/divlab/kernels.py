"""Numeric kernels behind the measure optimizers.

Everything here operates on plain floats and numpy arrays so the hot inner
loops can be compiled with numba. Scalar kernels and the Jacobi eigensolver
are single-source: the same function runs compiled (default) or interpreted.
The grid-scan kernels additionally have vectorized numpy twins; which one is
exported is decided at import time.

Set ``DIVLAB_NUMBA=0`` to force the pure-numpy implementations. The active
choice is exposed as ``BACKEND`` ("numba" or "numpy").
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_requested() -> bool:
    flag = os.environ.get("DIVLAB_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = numba is not None and _numba_requested()
BACKEND = "numba" if NUMBA_ENABLED else "numpy"

_INVPHI = 0.6180339887498949


def maybe_njit(func):
    """Compile ``func`` with numba when the numba backend is active."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func


# ---------------------------------------------------------------------------
# Decay amplitude G(t) and decay rate gamma(t)
# ---------------------------------------------------------------------------

@maybe_njit
def decay_g(t: float, gamma0: float, lam: float) -> float:
    """Survival amplitude G(t) of the resonant damped-qubit family.

    Solves G' = -gamma(t) G / 2 with G(0) = 1 in closed form. Three branches
    depending on the sign of lam^2 - 2*gamma0*lam (treated as degenerate
    within 1e-12).
    """
    d2 = lam * lam - 2.0 * gamma0 * lam
    h = 0.5 * t
    if d2 > 1e-12:
        d = math.sqrt(d2)
        return math.exp(-lam * h) * (math.cosh(d * h) + (lam / d) * math.sinh(d * h))
    if d2 < -1e-12:
        d = math.sqrt(-d2)
        return math.exp(-lam * h) * (math.cos(d * h) + (lam / d) * math.sin(d * h))
    return math.exp(-lam * h) * (1.0 + lam * h)


def decay_g_np(t, gamma0, lam: float) -> np.ndarray:
    """Vectorized twin of :func:`decay_g` over t and/or gamma0 arrays."""
    t, gamma0 = np.broadcast_arrays(np.asarray(t, dtype=float),
                                    np.asarray(gamma0, dtype=float))
    d2 = lam * lam - 2.0 * gamma0 * lam
    h = 0.5 * t
    out = np.empty(t.shape, dtype=float)
    m = d2 > 1e-12
    if m.any():
        d = np.sqrt(d2[m])
        out[m] = np.exp(-lam * h[m]) * (np.cosh(d * h[m])
                                        + (lam / d) * np.sinh(d * h[m]))
    m2 = d2 < -1e-12
    if m2.any():
        d = np.sqrt(-d2[m2])
        out[m2] = np.exp(-lam * h[m2]) * (np.cos(d * h[m2])
                                          + (lam / d) * np.sin(d * h[m2]))
    m3 = ~(m | m2)
    if m3.any():
        out[m3] = np.exp(-lam * h[m3]) * (1.0 + lam * h[m3])
    return out


@maybe_njit
def decay_gamma_parts(t: float, gamma0: float, lam: float) -> tuple:
    """Numerator and denominator of the time-dependent decay rate gamma(t).

    Kept separate so callers can apply their own pole handling.
    """
    d2 = lam * lam - 2.0 * gamma0 * lam
    h = 0.5 * t
    if d2 > 1e-12:
        d = math.sqrt(d2)
        num = 2.0 * lam * gamma0 * math.sinh(d * h)
        den = d * math.cosh(d * h) + lam * math.sinh(d * h)
    elif d2 < -1e-12:
        d = math.sqrt(-d2)
        num = 2.0 * lam * gamma0 * math.sin(d * h)
        den = d * math.cos(d * h) + lam * math.sin(d * h)
    else:
        num = lam * gamma0 * t
        den = 1.0 + lam * h
    return num, den


@maybe_njit
def rk4_decay(gamma0: float, lam: float, t_end: float, dt: float,
              gamma_clamp: float) -> tuple:
    """Classical RK4 trajectory of G' = -gamma(t) G / 2.

    Returns (times, amplitudes, clamped) where ``clamped`` records whether
    |gamma| ever hit ``gamma_clamp`` (pole regularization). The final sample
    lands exactly on t_end.
    """
    n_full = int(math.floor(t_end / dt + 1e-9))
    rem = t_end - n_full * dt
    extra = 1 if rem > 1e-12 else 0
    n = n_full + extra
    times = np.empty(n + 1, dtype=np.float64)
    vals = np.empty(n + 1, dtype=np.float64)
    times[0] = 0.0
    vals[0] = 1.0
    g = 1.0
    clamped = False
    for i in range(n):
        t0 = i * dt
        step = dt if i < n_full else rem
        # k_j = f(t, G) with f = -gamma(t) G / 2, gamma clamped near poles
        num, den = decay_gamma_parts(t0, gamma0, lam)
        gam = num / den if abs(den) > 1e-300 else gamma_clamp
        if abs(gam) > gamma_clamp:
            gam = gamma_clamp if gam > 0.0 else -gamma_clamp
            clamped = True
        k1 = -0.5 * gam * g
        num, den = decay_gamma_parts(t0 + 0.5 * step, gamma0, lam)
        gam = num / den if abs(den) > 1e-300 else gamma_clamp
        if abs(gam) > gamma_clamp:
            gam = gamma_clamp if gam > 0.0 else -gamma_clamp
            clamped = True
        k2 = -0.5 * gam * (g + 0.5 * step * k1)
        k3 = -0.5 * gam * (g + 0.5 * step * k2)
        num, den = decay_gamma_parts(t0 + step, gamma0, lam)
        gam = num / den if abs(den) > 1e-300 else gamma_clamp
        if abs(gam) > gamma_clamp:
            gam = gamma_clamp if gam > 0.0 else -gamma_clamp
            clamped = True
        k4 = -0.5 * gam * (g + step * k3)
        g = g + step * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        times[i + 1] = t0 + step
        vals[i + 1] = g
    return times, vals, clamped


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for small complex Hermitian matrices
# ---------------------------------------------------------------------------

@maybe_njit
def jacobi_eigh(a: np.ndarray) -> tuple:
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
    rotations.

    Returns (w, v) with eigenvalues ``w`` descending and eigenvectors in the
    columns of ``v``. Converges when the off-diagonal Frobenius norm drops
    below 1e-14 (scaled by the matrix norm for inputs far from unit scale).
    """
    n = a.shape[0]
    A = a.astype(np.complex128)
    V = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        V[i, i] = 1.0 + 0.0j
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += abs(A[i, j]) ** 2
    tol = 1e-14 * max(1.0, math.sqrt(fro))
    for _sweep in range(100):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(A[p, q]) ** 2
        if math.sqrt(2.0 * off) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                u = apq / r
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    tt = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    tt = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
                uc = u.conjugate()
                # A <- J^H A J with J acting on the (p, q) plane as
                # [[u c, u s], [-s, c]]; column transform then row transform.
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * u * akp - s * akq
                    A[k, q] = s * u * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * uc * apk - s * aqk
                    A[q, k] = s * uc * apk + c * aqk
                A[p, q] = 0.0 + 0.0j
                A[q, p] = 0.0 + 0.0j
                A[p, p] = complex(A[p, p].real, 0.0)
                A[q, q] = complex(A[q, q].real, 0.0)
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * u * vkp - s * vkq
                    V[k, q] = s * u * vkp + c * vkq
    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = A[i, i].real
    order = np.argsort(-w)
    w_out = np.empty(n, dtype=np.float64)
    vecs = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        w_out[j] = w[order[j]]
        for i in range(n):
            vecs[i, j] = V[i, order[j]]
    return w_out, vecs


@maybe_njit
def choi_matrix(g: float) -> np.ndarray:
    """Choi matrix of the amplitude-damping map with survival ratio g.

    Basis order |ee>, |eg>, |ge>, |gg> with the system as the first factor.
    """
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = 0.5 * g * g
    m[2, 2] = 0.5 * (1.0 - g * g)
    m[3, 3] = 0.5
    m[0, 3] = 0.5 * g
    m[3, 0] = 0.5 * g
    return m


@maybe_njit
def choi_trace_norm(g: float) -> float:
    """Trace norm of the amplitude-damping Choi matrix, via Jacobi."""
    w, _v = jacobi_eigh(choi_matrix(g))
    total = 0.0
    for i in range(w.shape[0]):
        total += abs(w[i])
    return total


@maybe_njit
def choi_pair_distance(g: float, gk: float) -> float:
    """Half trace norm between two amplitude-damping Choi matrices."""
    diff = choi_matrix(g) - choi_matrix(gk)
    w, _v = jacobi_eigh(diff)
    total = 0.0
    for i in range(w.shape[0]):
        total += abs(w[i])
    return 0.5 * total


# ---------------------------------------------------------------------------
# Inner minimization over the free family (the max-min objective's core)
# ---------------------------------------------------------------------------

@maybe_njit
def ad_pair_distance(p: float, c2: float, g: float, gk: float) -> float:
    """Trace distance between AD(g) and AD(gk) applied to the same state.

    ``p`` is the excited population and ``c2`` the squared coherence modulus
    of the input state.
    """
    dp = (g * g - gk * gk) * p
    return math.sqrt(dp * dp + (g - gk) * (g - gk) * c2)


@maybe_njit
def nm1_inner_min(p: float, c2: float, g: float, t: float, tau: float,
                  lam: float, g0_lo: float, g0_hi: float, n_grid: int) -> tuple:
    """min over gamma0 in [g0_lo, g0_hi] of the AD output distance.

    Grid scan followed by golden-section refinement inside the bracketing
    cell. Returns (value, gamma0_argmin).
    """
    if n_grid < 2 or g0_hi - g0_lo < 1e-15:
        gk = decay_g(t + tau, g0_lo, lam) / decay_g(t, g0_lo, lam)
        return ad_pair_distance(p, c2, g, gk), g0_lo
    step = (g0_hi - g0_lo) / (n_grid - 1)
    best = 1e300
    best_i = 0
    for i in range(n_grid):
        g0 = g0_lo + i * step
        gk = decay_g(t + tau, g0, lam) / decay_g(t, g0, lam)
        v = ad_pair_distance(p, c2, g, gk)
        if v < best:
            best = v
            best_i = i
    best_x = g0_lo + best_i * step
    a = g0_lo + (best_i - 1) * step
    b = g0_lo + (best_i + 1) * step
    if a < g0_lo:
        a = g0_lo
    if b > g0_hi:
        b = g0_hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    gk = decay_g(t + tau, x1, lam) / decay_g(t, x1, lam)
    f1 = ad_pair_distance(p, c2, g, gk)
    gk = decay_g(t + tau, x2, lam) / decay_g(t, x2, lam)
    f2 = ad_pair_distance(p, c2, g, gk)
    for _ in range(60):
        if f1 <= f2:
            b = x2
            x2 = x1
            f2 = f1
            x1 = b - _INVPHI * (b - a)
            gk = decay_g(t + tau, x1, lam) / decay_g(t, x1, lam)
            f1 = ad_pair_distance(p, c2, g, gk)
        else:
            a = x1
            x1 = x2
            f1 = f2
            x2 = a + _INVPHI * (b - a)
            gk = decay_g(t + tau, x2, lam) / decay_g(t, x2, lam)
            f2 = ad_pair_distance(p, c2, g, gk)
        if b - a < 1e-12:
            break
    if f1 < best:
        best = f1
        best_x = x1
    if f2 < best:
        best = f2
        best_x = x2
    return best, best_x


# ---------------------------------------------------------------------------
# Grid-scan kernels: numba loop version + vectorized numpy twin
# ---------------------------------------------------------------------------

def _pi_pair_scan_loops(p0, cx, cy, g0sq, g1sq):
    """Seed scan for the distance-growth maximization over state pairs.

    ``p0/cx/cy`` parametrize initial states; populations evolve with G^2 and
    coherences with G. Returns (best, i, j); ties break at first occurrence
    in row-major pair order.
    """
    n = p0.shape[0]
    best = -1e300
    bi = 0
    bj = 1
    for i in range(n):
        for j in range(i + 1, n):
            da = p0[i] - p0[j]
            dx = cx[i] - cx[j]
            dy = cy[i] - cy[j]
            c2 = dx * dx + dy * dy
            before = math.sqrt(g0sq * g0sq * da * da + g0sq * c2)
            after = math.sqrt(g1sq * g1sq * da * da + g1sq * c2)
            v = after - before
            if v > best:
                best = v
                bi = i
                bj = j
    return best, bi, bj


def _pi_pair_scan_numpy(p0, cx, cy, g0sq, g1sq):
    n = p0.shape[0]
    best = -np.inf
    bi = 0
    bj = 1
    block = 256
    cols = np.arange(n)[None, :]
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        da = p0[i0:i1, None] - p0[None, :]
        c2 = (cx[i0:i1, None] - cx[None, :]) ** 2 \
            + (cy[i0:i1, None] - cy[None, :]) ** 2
        v = np.sqrt(g1sq * g1sq * da * da + g1sq * c2) \
            - np.sqrt(g0sq * g0sq * da * da + g0sq * c2)
        # mask j <= i so both twins scan the identical pair set
        v[cols <= np.arange(i0, i1)[:, None]] = -np.inf
        k = int(np.argmax(v))
        if v.flat[k] > best:
            best = float(v.flat[k])
            bi = i0 + k // n
            bj = k % n
    return best, bi, bj


def _nm1_state_scan_loops(pt, ct2, g, t, tau, lam, g0_lo, g0_hi, n_grid):
    """Seed scan for the max-min objective: for every evolved state, take the
    refined family minimum, then keep the largest. Returns
    (best, state_index, gamma0_argmin).
    """
    n = pt.shape[0]
    best = -1e300
    bi = 0
    bg0 = g0_lo
    for i in range(n):
        v, x = nm1_inner_min(pt[i], ct2[i], g, t, tau, lam, g0_lo, g0_hi, n_grid)
        if v > best:
            best = v
            bi = i
            bg0 = x
    return best, bi, bg0


def _nm1_state_scan_numpy(pt, ct2, g, t, tau, lam, g0_lo, g0_hi, n_grid):
    def dvals(gk):
        dp = (g * g - gk * gk) * pt
        return np.sqrt(dp * dp + (g - gk) ** 2 * ct2)

    if n_grid < 2 or g0_hi - g0_lo < 1e-15:
        gk = float(decay_g_np(t + tau, g0_lo, lam) / decay_g_np(t, g0_lo, lam))
        v = dvals(gk)
        bi = int(v.argmax())
        return float(v[bi]), bi, g0_lo

    g0s = np.linspace(g0_lo, g0_hi, n_grid)
    gks = decay_g_np(t + tau, g0s, lam) / decay_g_np(t, g0s, lam)
    n = pt.shape[0]
    inner = np.empty(n)
    ki = np.empty(n, dtype=np.int64)
    block = 4096
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        dp = (g * g - gks[None, :] ** 2) * pt[i0:i1, None]
        v = np.sqrt(dp * dp + (g - gks[None, :]) ** 2 * ct2[i0:i1, None])
        inner[i0:i1] = v.min(axis=1)
        ki[i0:i1] = v.argmin(axis=1)

    # golden-section refinement of every state's bracket, in lockstep
    def f(x):
        gk = decay_g_np(t + tau, x, lam) / decay_g_np(t, x, lam)
        dp = (g * g - gk * gk) * pt
        return np.sqrt(dp * dp + (g - gk) ** 2 * ct2)

    step = (g0_hi - g0_lo) / (n_grid - 1)
    a = np.clip(g0_lo + (ki - 1) * step, g0_lo, g0_hi)
    b = np.clip(g0_lo + (ki + 1) * step, g0_lo, g0_hi)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = f(x1)
    f2 = f(x2)
    for _ in range(60):
        take1 = f1 <= f2
        new_a = np.where(take1, a, x1)
        new_b = np.where(take1, x2, b)
        probe = np.where(take1,
                         new_b - _INVPHI * (new_b - new_a),
                         new_a + _INVPHI * (new_b - new_a))
        fp = f(probe)
        new_x1 = np.where(take1, probe, x2)
        new_f1 = np.where(take1, fp, f2)
        new_x2 = np.where(take1, x1, probe)
        new_f2 = np.where(take1, f1, fp)
        a, b, x1, x2, f1, f2 = new_a, new_b, new_x1, new_x2, new_f1, new_f2
    best_f = inner
    best_x = g0_lo + ki * step
    for xx, ff in ((x1, f1), (x2, f2)):
        better = ff < best_f
        best_f = np.where(better, ff, best_f)
        best_x = np.where(better, xx, best_x)
    bi = int(best_f.argmax())
    return float(best_f[bi]), bi, float(best_x[bi])


def _d_pair_scan_loops(p0, cx, cy, es):
    """Seed scan for the free-set diameter.

    Unordered family pairs (a <= b) crossed with ordered state pairs; the
    family maps act directly on the scanned states. Returns
    (best, a, b, i, j).
    """
    n = p0.shape[0]
    m = es.shape[0]
    best = -1e300
    ba = 0
    bb = 0
    bi = 0
    bj = 0
    for a in range(m):
        for b in range(a, m):
            e1 = es[a]
            e2 = es[b]
            for i in range(n):
                for j in range(n):
                    da = e1 * e1 * p0[i] - e2 * e2 * p0[j]
                    dx = e1 * cx[i] - e2 * cx[j]
                    dy = e1 * cy[i] - e2 * cy[j]
                    v = math.sqrt(da * da + dx * dx + dy * dy)
                    if v > best:
                        best = v
                        ba = a
                        bb = b
                        bi = i
                        bj = j
    return best, ba, bb, bi, bj


def _d_pair_scan_numpy(p0, cx, cy, es):
    n = p0.shape[0]
    m = es.shape[0]
    best = -np.inf
    ba = bb = bi = bj = 0
    for a in range(m):
        for b in range(a, m):
            e1 = es[a]
            e2 = es[b]
            da = e1 * e1 * p0[:, None] - e2 * e2 * p0[None, :]
            dx = e1 * cx[:, None] - e2 * cx[None, :]
            dy = e1 * cy[:, None] - e2 * cy[None, :]
            v = np.sqrt(da * da + dx * dx + dy * dy)
            k = int(np.argmax(v))
            if v.flat[k] > best:
                best = float(v.flat[k])
                ba = a
                bb = b
                bi = k // n
                bj = k % n
    return best, ba, bb, bi, bj


if NUMBA_ENABLED:
    pi_pair_scan = numba.njit(cache=True)(_pi_pair_scan_loops)
    nm1_state_scan = numba.njit(cache=True)(_nm1_state_scan_loops)
    d_pair_scan = numba.njit(cache=True)(_d_pair_scan_loops)
else:
    pi_pair_scan = _pi_pair_scan_numpy
    nm1_state_scan = _nm1_state_scan_numpy
    d_pair_scan = _d_pair_scan_numpy
