"""Dense complex linear algebra kernel for small open-system problems.

Everything here targets system dimensions d <= 8 (superoperators up to
64 x 64), so dense numpy/scipy routines are used throughout.  All
functions are pure and deterministic on a given machine; operators are
plain complex ndarrays and are never mutated.

Conventions: hbar = k_B = 1; frequencies, energies and temperatures are
all expressed in units of a single reference angular frequency.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "NumericalFailureError",
    "as_complex_matrix",
    "hermiticity_defect",
    "require_hermitian",
    "check_density_matrix",
    "hermitian_eig",
    "kron",
    "null_space",
    "psd_min_eig",
    "matexp_apply",
    "partial_trace",
    "random_hermitian",
    "random_density_matrix",
]

#: Relative tolerance used when deciding whether a matrix is Hermitian.
HERMITICITY_RTOL = 1e-12


class NumericalFailureError(RuntimeError):
    """A numerical routine produced a result outside its guaranteed tolerance."""


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-D complex ndarray and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def hermiticity_defect(m) -> float:
    """Max-norm of M - M^dagger, the absolute deviation from Hermiticity."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def require_hermitian(m, rtol: float = HERMITICITY_RTOL, name: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is square and Hermitian within ``rtol`` (relative to max entry)."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    scale = max(float(np.max(np.abs(m))), 1.0) if m.size else 1.0
    if hermiticity_defect(m) > rtol * scale:
        raise ValueError(f"{name} is not Hermitian (defect {hermiticity_defect(m):.3e})")
    return m


def check_density_matrix(rho, trace_tol: float = 1e-10, eig_tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix.

    Raises ValueError when any invariant is violated beyond its tolerance.
    """
    rho = require_hermitian(rho, name="density matrix")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1 by more than {trace_tol}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return rho


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with real eigenvalues in ascending
    order and eigenvectors as the columns of a unitary matrix, so that
    M @ V = V @ diag(w).
    """
    m = require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def kron(a, b) -> np.ndarray:
    """Kronecker (tensor) product of two matrices."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def null_space(l, tol: float) -> list[np.ndarray]:
    """Orthonormal basis of the numerical kernel of a square matrix.

    Returns all right singular vectors whose singular value is <= ``tol``.
    An empty list means the kernel is trivial at the given tolerance.
    """
    l = as_complex_matrix(l)
    if l.shape[0] != l.shape[1]:
        raise ValueError(f"matrix must be square, got shape {l.shape}")
    _, s, vh = np.linalg.svd(l)
    return [vh[i].conj() for i in range(len(s)) if s[i] <= tol]


def psd_min_eig(m) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    The caller decides positive semidefiniteness by comparing the result
    against its tolerance (typically >= -tol counts as PSD).
    """
    m = require_hermitian(m)
    return float(np.linalg.eigvalsh(m)[0])


def matexp_apply(l, v, t: float) -> np.ndarray:
    """Apply the propagator exp(L t) to a vector.

    Uses scaling-and-squaring via the dense matrix exponential, which is
    accurate to well below 1e-9 relative error at the sizes used here.
    """
    l = as_complex_matrix(l)
    v = np.asarray(v, dtype=complex)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"propagation time must be finite and >= 0, got {t}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf entries")
    return scipy.linalg.expm(l * t) @ v


def partial_trace(rho, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator on C^(d1) x C^(d2).

    ``keep=0`` returns the reduced operator on the first factor, ``keep=1``
    on the second.
    """
    d1, d2 = dims
    rho = as_complex_matrix(rho)
    if rho.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"operator shape {rho.shape} does not match dims {dims}")
    r = rho.reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ikjk->ij", r)
    if keep == 1:
        return np.einsum("kikj->ij", r)
    raise ValueError("keep must be 0 or 1")


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries (test utility)."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix (test utility)."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
