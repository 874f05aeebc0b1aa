"""Time evolution, steady states, heat currents and jump-channel analysis.

Steady states are extracted from the kernel of the Liouvillian (singular
value threshold) rather than by long-time propagation; propagation is
kept as an independent cross-check.  Heat currents are the per-reservoir
energy flows J_p = Tr[H_S D_p[rho]]; the ``net`` value reported for a
(hot, cold) pair follows the difference convention J = Tr[H_S (D_hot -
D_cold)[rho]], which at steady state equals twice the flow carried
through the system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import NumericalFailureError, check_density_matrix, hermitian_eig, null_space
from .bohr import BohrDecomposition, bohr_decompose
from .bath import Exact, GammaMatrix, build_gamma_matrix
from .lindblad import Superoperator, SystemModel, dissipator_from_gamma, vec, unvec

__all__ = [
    "SteadyStateResult",
    "HeatCurrentReport",
    "JumpChannels",
    "evolve",
    "steady_state",
    "gibbs_state",
    "heat_current",
    "jump_channels",
    "model_jump_channels",
    "post_jump_state",
]


def gibbs_state(h, temperature: float) -> np.ndarray:
    """Canonical equilibrium state exp(-H/T) / Z."""
    if not temperature > 0:
        raise ValueError("the Gibbs state needs T > 0")
    w, v = hermitian_eig(h)
    weights = np.exp(-(w - w.min()) / temperature)
    return v @ np.diag(weights / weights.sum()) @ v.conj().T


@dataclass(frozen=True)
class SteadyStateResult:
    """A stationary density matrix with its kernel multiplicity and residual."""

    rho: np.ndarray
    multiplicity: int
    residual: float          # ||L vec(rho)||

    @property
    def degenerate(self) -> bool:
        return self.multiplicity > 1


@dataclass(frozen=True)
class HeatCurrentReport:
    """Per-reservoir energy flows and the hot-minus-cold net convention."""

    per_reservoir: dict
    net: float

    def flow(self, label: str) -> float:
        return self.per_reservoir[label]

    def balance_defect(self) -> float:
        """|sum_p J_p|, which vanishes at a steady state."""
        return abs(sum(self.per_reservoir.values()))


def evolve(liouvillian: Superoperator, rho0, t_grid) -> list[np.ndarray]:
    """Propagate rho(t_k) = exp(L t_k) rho0 over an ascending time grid.

    Each returned state is validated (trace drift <= 1e-8, Hermiticity,
    positivity within 1e-8); a violation raises NumericalFailureError.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a nonempty 1-D sequence")
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must start at 0 and be ascending")
    rho0 = check_density_matrix(rho0)

    states = []
    v = vec(rho0)
    previous_t = 0.0
    for t in t_grid:
        step = t - previous_t
        if step > 0:
            v = scipy.linalg.expm(liouvillian.matrix * step) @ v
            previous_t = t
        rho = unvec(v)
        drift = abs(np.trace(rho) - 1.0)
        if drift > 1e-8:
            raise NumericalFailureError(f"trace drifted by {drift:.3e} at t = {t}")
        try:
            check_density_matrix(rho, trace_tol=1e-8, eig_tol=1e-8)
        except ValueError as exc:
            raise NumericalFailureError(f"state invalid at t = {t}: {exc}") from exc
        states.append(rho)
    return states


def steady_state(liouvillian: Superoperator, tol_factor: float = 1e-10) -> SteadyStateResult:
    """Stationary state from the kernel of the Liouvillian.

    The kernel is found by singular-value thresholding at ``tol_factor``
    times the spectral norm of L.  From the kernel the Hermitian,
    positive, trace-one representative is constructed; if the kernel is
    degenerate, the returned state is the projection of the maximally
    mixed state onto the kernel (the canonical representative) and the
    multiplicity is reported.
    """
    l = liouvillian.matrix
    norm = max(float(np.linalg.norm(l, 2)), 1e-300)
    kernel = null_space(l, tol_factor * norm)
    if not kernel:
        raise NumericalFailureError("Liouvillian has no kernel at the given tolerance")
    multiplicity = len(kernel)

    d = liouvillian.dim
    if multiplicity == 1:
        candidate = unvec(kernel[0])
        candidate = 0.5 * (candidate + candidate.conj().T)
        trace = np.trace(candidate).real
        if abs(trace) < 1e-12:
            raise NumericalFailureError("kernel element is traceless; no stationary state")
        rho = candidate / trace
    else:
        # Hermitian-part projection of the maximally mixed state onto the kernel.
        basis = np.array(kernel)                    # rows orthonormal
        mixed = vec(np.eye(d) / d)
        coefficients = basis.conj() @ mixed
        candidate = unvec(basis.T @ coefficients)
        candidate = 0.5 * (candidate + candidate.conj().T)
        trace = np.trace(candidate).real
        if abs(trace) < 1e-12:
            raise NumericalFailureError("degenerate kernel has no positive representative")
        rho = candidate / trace

    w = np.linalg.eigvalsh(rho)
    if w[0] < -1e-8:
        raise NumericalFailureError(f"kernel representative not positive (min eig {w[0]:.3e})")
    rho = _clip_positive(rho)
    residual = float(np.linalg.norm(l @ vec(rho)))
    return SteadyStateResult(rho=rho, multiplicity=multiplicity, residual=residual)


def _clip_positive(rho: np.ndarray) -> np.ndarray:
    """Remove negative eigenvalue dust of order the solver tolerance."""
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] >= 0.0:
        return rho
    w = np.clip(w, 0.0, None)
    rho = v @ np.diag(w) @ v.conj().T
    return rho / np.trace(rho).real


def _reservoir_dissipators(model: SystemModel) -> dict:
    out = {}
    for x, bath in model.couplings:
        dec = bohr_decompose(model.hamiltonian, x, freq_tol=model.freq_tol)
        g = build_gamma_matrix(dec, bath, model.mode,
                               flatten_at=model.flatten_occupations_at)
        out[bath.label] = dissipator_from_gamma(dec, g)
    return out


def heat_current(model: SystemModel, rho, hot_label: str, cold_label: str) -> HeatCurrentReport:
    """Per-reservoir energy flows J_p = Tr[H_S D_p[rho]] and the net difference.

    ``net`` is J_hot - J_cold; positive J_p means energy flowing from
    reservoir p into the system.
    """
    labels = model.labels
    for label in (hot_label, cold_label):
        if label not in labels:
            raise KeyError(f"no reservoir labelled {label!r} (have {labels})")
    rho = check_density_matrix(rho, trace_tol=1e-6, eig_tol=1e-6)
    h = model.hamiltonian
    flows = {}
    for label, dissipator in _reservoir_dissipators(model).items():
        flows[label] = float(np.trace(h @ dissipator.apply(rho)).real)
    return HeatCurrentReport(per_reservoir=flows,
                             net=flows[hot_label] - flows[cold_label])


@dataclass(frozen=True)
class JumpChannels:
    """Gain/loss decomposition of a limit-mode dissipator.

    Each channel is a (rate, operator) pair obtained by diagonalizing the
    rate-matrix block of one frequency sign: loss channels (negative
    frequencies) lower the system energy (emission into the reservoir),
    gain channels (positive frequencies) raise it (absorption).  The
    sandwich part of the dissipator equals sum_k rate_k C_k rho C_k^dagger
    over both lists.
    """

    loss: tuple      # ((rate, operator), ...)
    gain: tuple


def jump_channels(dec: BohrDecomposition, g: GammaMatrix,
                  rate_tol: float = 1e-14) -> JumpChannels:
    """Diagonalize the sign blocks of the rate matrix into jump channels."""
    if isinstance(g.mode, Exact):
        raise ValueError("jump channels need a limit-mode rate matrix "
                         "(no clean sign partition in Exact mode)")
    if g.indices != dec.indices:
        raise ValueError("rate-matrix indices do not match the decomposition")

    def block_channels(ms: list) -> tuple:
        if not ms:
            return ()
        positions = [g.indices.index(m) for m in ms]
        block = g.entries[np.ix_(positions, positions)]
        w, u = np.linalg.eigh(0.5 * (block + block.conj().T))
        channels = []
        scale = max(g.max_abs(), 1e-300)
        for k in range(len(ms)):
            if w[k] <= rate_tol * scale:
                continue
            op = sum(u[i, k] * dec.operator(ms[i]) for i in range(len(ms)))
            channels.append((float(w[k]), op))
        return tuple(channels)

    loss = block_channels([m for m in g.indices if m < 0])
    gain = block_channels([m for m in g.indices if m > 0])
    return JumpChannels(loss=loss, gain=gain)


def model_jump_channels(model: SystemModel) -> JumpChannels:
    """Jump channels of every reservoir of a model, merged into one report."""
    loss: list = []
    gain: list = []
    for x, bath in model.couplings:
        dec = bohr_decompose(model.hamiltonian, x, freq_tol=model.freq_tol)
        g = build_gamma_matrix(dec, bath, model.mode,
                               flatten_at=model.flatten_occupations_at)
        channels = jump_channels(dec, g)
        loss.extend(channels.loss)
        gain.extend(channels.gain)
    return JumpChannels(loss=tuple(loss), gain=tuple(gain))


def post_jump_state(channels: JumpChannels, rho, direction: str) -> np.ndarray:
    """Normalized state after a jump of the selected direction.

    rho' = sum_k r_k C_k rho C_k^dagger / tr(...) over the loss (emission)
    or gain (absorption) channels.
    """
    if direction not in ("loss", "gain"):
        raise ValueError("direction must be 'loss' or 'gain'")
    rho = check_density_matrix(rho, trace_tol=1e-6, eig_tol=1e-6)
    selected = channels.loss if direction == "loss" else channels.gain
    if not selected:
        raise ValueError(f"no {direction} channels present")
    total = np.zeros_like(np.asarray(rho, dtype=complex))
    for rate, op in selected:
        total += rate * (op @ rho @ op.conj().T)
    weight = np.trace(total).real
    if weight <= 1e-14 * max(rate for rate, _ in selected):
        raise ValueError("jump probability vanishes for this state and direction")
    return total / weight
