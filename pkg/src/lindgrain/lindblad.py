"""Dissipator and Liouvillian assembly on vectorized density matrices.

Vectorization is column-stacking throughout: vec(A rho B) =
(B^T kron A) vec(rho), so the Liouvillian of

    drho/dt = -i [H, rho] + sum_mn gamma_mn (X_m rho X_n^dagger
              - 1/2 {X_n^dagger X_m, rho})

is a d^2 x d^2 matrix acting on vec(rho).  Rates gamma_mn come from a
:class:`~lindgrain.bath.GammaMatrix`; multi-reservoir models sum one
independently built dissipator per reservoir.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_complex_matrix, require_hermitian
from .bohr import BohrDecomposition, bohr_decompose
from .bath import BathSpec, Exact, GammaMatrix, build_gamma_matrix, correlation_function

__all__ = [
    "vec",
    "unvec",
    "Superoperator",
    "SystemModel",
    "commutator_superoperator",
    "dissipator_from_gamma",
    "energy_shift",
    "assemble_liouvillian",
    "lindblad_canonical_check",
]


def vec(rho) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v, dtype=complex)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d, order="F")


def _sandwich(a, b) -> np.ndarray:
    """Superoperator matrix of rho -> A rho B."""
    return np.kron(np.asarray(b, dtype=complex).T, np.asarray(a, dtype=complex))


@dataclass(frozen=True)
class Superoperator:
    """A d^2 x d^2 generator acting on column-stacked density matrices."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"matrix shape {m.shape} does not match dim {self.dim}")

    def apply(self, rho) -> np.ndarray:
        """Image of a density matrix under the generator."""
        return unvec(self.matrix @ vec(rho))

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.dim != other.dim:
            raise ValueError("cannot add superoperators of different dimension")
        return Superoperator(self.dim, self.matrix + other.matrix)

    def trace_preservation_defect(self) -> float:
        """Norm of vec(I)^dagger L, zero for a trace-preserving generator."""
        ident = vec(np.eye(self.dim))
        return float(np.linalg.norm(ident.conj() @ self.matrix))

    def hermiticity_preservation_defect(self, rho) -> float:
        """Max-norm of L(rho) - L(rho)^dagger for Hermitian rho."""
        image = self.apply(rho)
        return float(np.max(np.abs(image - image.conj().T)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class SystemModel:
    """System Hamiltonian plus reservoir couplings and a coarse-graining mode.

    ``couplings`` is a sequence of (X, bath) pairs, one per independent
    reservoir.  ``flatten_occupations_at`` evaluates every occupation
    number at the given fixed frequency instead of the channel frequency
    (used to isolate the near-degenerate closed forms); ``include_energy_shift``
    adds the coarse-grained energy shift to the Hamiltonian (Exact mode
    only, Ohmic baths only; by default the shift is a diagnostic that is
    computed on request and never applied).
    """

    hamiltonian: np.ndarray
    couplings: tuple
    mode: object
    flatten_occupations_at: float | None = None
    include_energy_shift: bool = False
    freq_tol: float | None = None

    def __post_init__(self):
        h = require_hermitian(self.hamiltonian, name="hamiltonian")
        d = h.shape[0]
        labels = []
        for x, bath in self.couplings:
            if np.asarray(x).shape != (d, d):
                raise ValueError("coupling operator dimension does not match the hamiltonian")
            if not isinstance(bath, BathSpec):
                raise TypeError(f"expected BathSpec, got {type(bath)!r}")
            labels.append(bath.label)
        if len(set(labels)) != len(labels):
            raise ValueError(f"bath labels must be unique, got {labels}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def labels(self) -> tuple:
        return tuple(bath.label for _, bath in self.couplings)

    def coupling(self, label: str):
        for x, bath in self.couplings:
            if bath.label == label:
                return x, bath
        raise KeyError(f"no reservoir labelled {label!r} (have {self.labels})")


def commutator_superoperator(h) -> Superoperator:
    """Unitary part rho -> -i [H, rho] as a superoperator."""
    h = require_hermitian(h, name="hamiltonian")
    d = h.shape[0]
    ident = np.eye(d)
    return Superoperator(d, -1j * (_sandwich(h, ident) - _sandwich(ident, h)))


def dissipator_from_gamma(dec: BohrDecomposition, g: GammaMatrix) -> Superoperator:
    """Dissipator sum_mn gamma_mn (X_m rho X_n^dagger - 1/2 {X_n^dagger X_m, rho})."""
    if g.indices != dec.indices:
        raise ValueError(f"rate-matrix indices {g.indices} do not match decomposition "
                         f"indices {dec.indices}")
    d = dec.dim
    ident = np.eye(d)
    total = np.zeros((d * d, d * d), dtype=complex)
    for i, m in enumerate(g.indices):
        x_m = dec.operator(m)
        for j, n in enumerate(g.indices):
            rate = g.entries[i, j]
            if rate == 0.0:
                continue
            x_n_dag = dec.operator(n).conj().T
            anti = x_n_dag @ x_m
            total += rate * (_sandwich(x_m, x_n_dag)
                             - 0.5 * (_sandwich(anti, ident) + _sandwich(ident, anti)))
    return Superoperator(d, total)


def energy_shift(dec: BohrDecomposition, bath: BathSpec, dt: float) -> np.ndarray:
    """Coarse-grained second-order energy shift of the Hamiltonian.

    Evaluates

        dH = -(i / 2 dt) int_0^dt dt2 int_0^t1..t2 Tr_R[[Vbar(t2), Vbar(t1)] rho_R]

    by expanding Vbar in eigenoperators, which reduces the double time
    integral to one quadrature in the correlation-function lag per
    operator pair.  The result is Hermitian up to quadrature error and is
    a diagnostic: it is not added to any Hamiltonian unless explicitly
    requested on the model.
    """
    bath._require_ohmic("energy shift")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ms = (0,) + dec.indices
    ops = {m: dec.operator(m) for m in ms}
    freqs = {m: dec.frequency(m) for m in ms}
    scale = bath.eta * bath.cutoff**2 / (2.0 * math.pi)
    kwargs = dict(epsabs=1e-13 * scale * dt, epsrel=1e-10, limit=800)
    from scipy import integrate as _integrate

    def window(tau: float, c: float) -> complex:
        # int_tau^dt e^{i c s} ds
        if c == 0.0:
            return complex(dt - tau)
        return (np.exp(1j * c * dt) - np.exp(1j * c * tau)) / (1j * c)

    def k_factor(a: float, b: float) -> complex:
        # int_0^dt dt2 int_0^t2 dt1 G(t2-t1) e^{i a t2 + i b t1}
        def f(tau: float) -> complex:
            return correlation_function(tau, bath) * np.exp(-1j * b * tau) * window(tau, a + b)
        re, _ = _integrate.quad(lambda u: f(u).real, 0.0, dt, **kwargs)
        im, _ = _integrate.quad(lambda u: f(u).imag, 0.0, dt, **kwargs)
        return complex(re, im)

    d = dec.dim
    shift = np.zeros((d, d), dtype=complex)
    for m in ms:
        for n in ms:
            if not np.any(ops[m]) or not np.any(ops[n]):
                continue
            # ordered product X(t2) X(t1) with kernel G(t2 - t1), minus the
            # reverse-ordered product X(t1) X(t2) with kernel G(t1 - t2);
            # in both, the left operator index pairs with the left kernel slot
            forward = k_factor(freqs[m], freqs[n])
            backward = np.conj(k_factor(-freqs[n], -freqs[m]))
            shift += ops[m] @ ops[n] * (forward - backward)
    return (-1j / (2.0 * dt)) * shift


def assemble_liouvillian(model: SystemModel) -> Superoperator:
    """Full generator: unitary part plus one dissipator per reservoir.

    Reservoirs are independent (their bath operators commute), so each
    dissipator is built on its own from the Bohr decomposition of its
    coupling operator and summed.
    """
    h = np.asarray(model.hamiltonian, dtype=complex)
    if model.include_energy_shift:
        if not isinstance(model.mode, Exact):
            raise ValueError("the energy shift needs a finite coarse-graining interval; "
                             "use Exact mode")
        for x, bath in model.couplings:
            dec = bohr_decompose(h, x, freq_tol=model.freq_tol)
            h = h + energy_shift(dec, bath, model.mode.dt)
        h = 0.5 * (h + h.conj().T)
    total = commutator_superoperator(h)
    for x, bath in model.couplings:
        dec = bohr_decompose(model.hamiltonian, x, freq_tol=model.freq_tol)
        g = build_gamma_matrix(dec, bath, model.mode,
                               flatten_at=model.flatten_occupations_at)
        total = total + dissipator_from_gamma(dec, g)
    return total


# ----------------------------------------------------------------------
# Canonical (GKS) form check
# ----------------------------------------------------------------------

def _hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis with F_0 = I/sqrt(d), rest traceless."""
    basis = [np.eye(d, dtype=complex) / math.sqrt(d)]
    for k in range(1, d):         # diagonal (generalized Gell-Mann) elements
        f = np.zeros((d, d), dtype=complex)
        f[:k, :k] = np.eye(k)
        f[k, k] = -k
        basis.append(f / math.sqrt(k * (k + 1)))
    for a in range(d):            # off-diagonal symmetric and antisymmetric pairs
        for b in range(a + 1, d):
            f = np.zeros((d, d), dtype=complex)
            f[a, b] = f[b, a] = 1.0 / math.sqrt(2.0)
            basis.append(f)
            f = np.zeros((d, d), dtype=complex)
            f[a, b] = -1j / math.sqrt(2.0)
            f[b, a] = 1j / math.sqrt(2.0)
            basis.append(f)
    return basis


def lindblad_canonical_check(s: Superoperator, tol: float = 1e-10) -> tuple[bool, float]:
    """Complete-positivity test of a generator via its Kossakowski matrix.

    Expands the generator over an orthonormal Hermitian operator basis
    {F_i} with F_0 proportional to the identity, L[rho] = sum c_ij
    F_i rho F_j; the block over the traceless elements (i, j >= 1) is the
    Kossakowski matrix of the canonical form, and the generator is the
    sum of a commutator and a completely positive dissipator exactly when
    that block is positive semidefinite.  Returns (is_cp, min eigenvalue
    of the block).
    """
    basis = _hermitian_basis(s.dim)
    coeff = np.zeros((len(basis), len(basis)), dtype=complex)
    for i, fi in enumerate(basis):
        for j, fj in enumerate(basis):
            probe = _sandwich(fi, fj)       # F_i rho F_j (Hermitian basis)
            coeff[i, j] = np.trace(probe.conj().T @ s.matrix)
    kossakowski = coeff[1:, 1:]
    kossakowski = 0.5 * (kossakowski + kossakowski.conj().T)
    min_eig = float(np.linalg.eigvalsh(kossakowski)[0])
    scale = max(float(np.max(np.abs(kossakowski))), 1.0)
    return min_eig >= -tol * scale, min_eig
