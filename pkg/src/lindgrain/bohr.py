"""Bohr-frequency eigenoperator decomposition of a coupling operator.

A coupling operator X is split along the transition frequencies of the
system Hamiltonian H into eigenoperators

    X_m = sum_{a,b} |a><b| <a|X|b>   over level pairs with w_a - w_b = w_m,

which satisfy [H, X_m] = w_m X_m and sum_m X_m + X_0 = X.  Frequencies are
labelled m = -N..-1, 1..N with w_{-m} = -w_m and X_{-m} = X_m^dagger; the
zero-frequency block X_0 (diagonal part of X in the energy basis, including
degenerate subspaces) is carried separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import as_complex_matrix, hermitian_eig, require_hermitian

__all__ = ["BohrDecomposition", "bohr_decompose", "interaction_picture_check"]


@dataclass(frozen=True)
class BohrDecomposition:
    """Eigenoperator decomposition {(w_m, X_m)} of a coupling operator.

    ``frequencies[k]`` is the k-th positive Bohr frequency in ascending
    order and corresponds to index m = k + 1; negative indices address the
    adjoint (lowering) partners.  ``x_zero`` collects the zero-frequency
    part (exactly the zero matrix when X has no diagonal elements in the
    energy eigenbasis).
    """

    frequencies: np.ndarray            # positive Bohr frequencies, ascending
    raising: tuple                     # X_m for m = 1..N
    lowering: tuple                    # X_{-m} for m = 1..N
    x_zero: np.ndarray                 # zero-frequency block X_0
    basis: np.ndarray                  # eigenvector columns of H used for grouping
    ambiguous_grouping: bool = False   # freq_tol merged genuinely distinct frequencies

    @property
    def dim(self) -> int:
        return self.x_zero.shape[0]

    @property
    def n_frequencies(self) -> int:
        return len(self.frequencies)

    @property
    def indices(self) -> tuple:
        """Nonzero Bohr indices (-N, .., -1, 1, .., N) in frequency order."""
        n = self.n_frequencies
        return tuple(range(-n, 0)) + tuple(range(1, n + 1))

    def frequency(self, m: int) -> float:
        if m == 0:
            return 0.0
        return float(np.sign(m)) * float(self.frequencies[abs(m) - 1])

    def operator(self, m: int) -> np.ndarray:
        if m == 0:
            return self.x_zero
        return self.raising[m - 1] if m > 0 else self.lowering[-m - 1]

    def completeness_defect(self, x) -> float:
        """Max-norm of (sum_m X_m + X_0) - X."""
        total = self.x_zero + sum(self.raising) + sum(self.lowering)
        return float(np.max(np.abs(total - as_complex_matrix(x))))

    def has_zero_block(self, tol: float = 1e-14) -> bool:
        """True when the coupling has a nonvanishing zero-frequency part."""
        return bool(np.max(np.abs(self.x_zero)) > tol)


def bohr_decompose(h, x, freq_tol: float | None = None) -> BohrDecomposition:
    """Decompose a coupling operator into Bohr-frequency eigenoperators of H.

    Transition frequencies closer than ``freq_tol`` are grouped into one
    eigenoperator; the default tolerance is 1e-9 times the largest
    transition frequency, wide enough to absorb eigensolver noise while
    keeping physically distinct frequencies apart.  If the requested
    tolerance merges frequencies that differ by more than numerical noise,
    the result is flagged via ``ambiguous_grouping``.
    """
    h = require_hermitian(h, name="hamiltonian")
    x = require_hermitian(x, name="coupling operator")
    if x.shape != h.shape:
        raise ValueError(f"dimension mismatch: H is {h.shape}, X is {x.shape}")

    evals, basis = hermitian_eig(h)
    gaps = evals[:, None] - evals[None, :]          # w_a - w_b
    scale = float(np.max(np.abs(gaps)))
    if scale == 0.0:
        scale = 1.0
    if freq_tol is None:
        freq_tol = 1e-9 * scale
    if freq_tol <= 0:
        raise ValueError(f"freq_tol must be positive, got {freq_tol}")

    x_eig = basis.conj().T @ x @ basis              # X in the energy eigenbasis

    # Cluster the transition frequencies: chain sorted values whose
    # consecutive separation is <= freq_tol, then assign every level pair
    # to its cluster by interval.
    flat = np.sort(gaps.ravel())
    breaks = np.flatnonzero(np.diff(flat) > freq_tol)
    lows = flat[np.concatenate(([0], breaks + 1))]
    highs = flat[np.concatenate((breaks, [len(flat) - 1]))]
    centers = 0.5 * (lows + highs)
    edges = 0.5 * (highs[:-1] + lows[1:])           # decision boundaries
    cluster_of = np.digitize(gaps, edges)

    # A cluster whose internal spread exceeds numerical noise has merged
    # genuinely distinct frequencies.
    noise_floor = 1e3 * np.finfo(float).eps * scale
    ambiguous = bool(np.any(highs - lows > noise_floor))

    zero_k = int(np.argmin(np.abs(centers)))
    centers[zero_k] = 0.0

    def cluster_operator(k: int) -> np.ndarray:
        return basis @ np.where(cluster_of == k, x_eig, 0.0) @ basis.conj().T

    # Drop channels whose matrix elements all vanish: a level gap is a Bohr
    # frequency of the coupling only when X actually connects those levels.
    x_scale = max(float(np.max(np.abs(x))), 1e-300)
    null_tol = 1e-12 * x_scale

    positive = [(centers[k], k) for k in range(len(centers)) if k != zero_k and centers[k] > 0]
    positive.sort()
    frequencies = []
    raising = []
    lowering = []
    for c, k in positive:
        up = cluster_operator(k)
        if np.max(np.abs(up)) <= null_tol:
            continue
        negs = [kk for kk in range(len(centers)) if kk != zero_k and centers[kk] < 0]
        k_neg = min(negs, key=lambda kk: abs(centers[kk] + c))
        frequencies.append(0.5 * (c - centers[k_neg]))   # symmetrized magnitude
        raising.append(up)
        lowering.append(cluster_operator(k_neg))

    dec = BohrDecomposition(
        frequencies=np.array(frequencies),
        raising=tuple(raising),
        lowering=tuple(lowering),
        x_zero=cluster_operator(zero_k),
        basis=basis,
        ambiguous_grouping=ambiguous,
    )
    return dec


def interaction_picture_check(dec: BohrDecomposition, h, x, t: float) -> float:
    """Max-norm error of the eigenoperator expansion of X in the interaction picture.

    Compares sum_m X_m exp(i w_m t) + X_0 against exp(iHt) X exp(-iHt);
    the return value bounds both the completeness defect (at t = 0) and
    the frequency assignment of every eigenoperator at finite t.
    """
    h = require_hermitian(h, name="hamiltonian")
    x = as_complex_matrix(x)
    expansion = dec.x_zero.astype(complex).copy()
    for m in dec.indices:
        expansion += dec.operator(m) * np.exp(1j * dec.frequency(m) * t)
    u = scipy.linalg.expm(1j * h * t)
    exact = u @ x @ u.conj().T
    return float(np.max(np.abs(expansion - exact)))
