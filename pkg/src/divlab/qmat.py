"""Small complex Hermitian linear algebra: eigendecomposition, trace norm,
trace distance, Bloch-ball state construction and state validation.

All matrices are plain ``numpy.ndarray`` of complex128; only 2x2 (system)
and 4x4 (system plus one ancilla qubit) operators are supported. Basis
convention: |e> = (1,0)^T excited, |g> = (0,1)^T ground; the 4x4 ordering is
|ee>, |eg>, |ge>, |gg> with the system as the first factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10

_SUPPORTED_DIMS = (2, 4)


def asymmetry(a: np.ndarray) -> float:
    """Largest entrywise deviation of ``a`` from its conjugate transpose."""
    return float(np.abs(a - a.conj().T).max())


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in _SUPPORTED_DIMS:
        raise ValueError(f"only dims {_SUPPORTED_DIMS} are supported, got {a.shape[0]}")
    return a


def assert_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate hermiticity within ``tol``; the error names the asymmetry."""
    a = _check_square(a)
    asym = asymmetry(a)
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max asymmetry {asym:.3e} exceeds {tol:.1e}")
    return a


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian
    matrix, computed by cyclic Jacobi rotations.
    """
    a = assert_hermitian(a)
    # symmetrize away sub-tolerance asymmetry before rotating
    return kernels.jacobi_eigh(0.5 * (a + a.conj().T))


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w, _ = hermitian_eig(a)
    return float(np.abs(w).sum())


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Half the trace norm of the difference of two density matrices."""
    rho1 = np.asarray(rho1, dtype=np.complex128)
    rho2 = np.asarray(rho2, dtype=np.complex128)
    if rho1.shape != rho2.shape:
        raise ValueError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")
    return 0.5 * trace_norm(rho1 - rho2)


def min_eigenvalue(a: np.ndarray) -> float:
    w, _ = hermitian_eig(a)
    return float(w[-1])


def is_density(rho: np.ndarray) -> bool:
    try:
        assert_density(rho)
    except ValueError:
        return False
    return True


def assert_density(rho: np.ndarray) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD within tolerance."""
    rho = assert_hermitian(rho)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {tr!r} deviates from 1 beyond {TRACE_TOL:.1e}")
    lo = min_eigenvalue(rho)
    if lo < PSD_TOL:
        raise ValueError(f"minimum eigenvalue {lo:.3e} below the PSD tolerance {PSD_TOL:.1e}")
    return rho


@dataclass(frozen=True)
class BlochVector:
    """Point of the closed Bloch ball: rho = (1 + r n.sigma) / 2."""

    r: float
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")


def bloch_to_state(b: BlochVector) -> np.ndarray:
    """Density matrix of a Bloch-ball point, |e> along the north pole."""
    z = b.r * np.cos(b.theta)
    x = b.r * np.sin(b.theta) * np.cos(b.phi)
    y = b.r * np.sin(b.theta) * np.sin(b.phi)
    return 0.5 * np.array(
        [[1.0 + z, x - 1j * y],
         [x + 1j * y, 1.0 - z]],
        dtype=np.complex128,
    )
