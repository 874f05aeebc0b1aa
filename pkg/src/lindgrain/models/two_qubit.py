"""Pair of exchange-coupled qubits damped by one or two thermal reservoirs.

System Hamiltonian (hbar = 1)

    H = (w_s / 2)(sigma_1z + sigma_2z) + Omega (sigma_1+ sigma_2- + h.c.)

with eigenstates, in the fixed basis order used throughout this module,

    |u> = |e e>        E = +w_s
    |+> = (|e g> + |g e>)/sqrt(2)   E = +Omega
    |-> = (|e g> - |g e>)/sqrt(2)   E = -Omega
    |l> = |g g>        E = -w_s.

Qubit 1 couples to the "hot" reservoir through sigma_1x, qubit 2 to the
"cold" reservoir through sigma_2x.  The transition operators of sigma_2x
are X_1 = (|u><+| - |-><l|)/sqrt(2) at w_s - Omega and X_2 = (|+><l| +
|u><-|)/sqrt(2) at w_s + Omega; the sigma_1x operators follow by flipping
the sign of |->.

Closed forms implemented here (verified against the assembled generator):

* partition function Z = 2[cosh(w_s/T) + cosh(Omega/T)] and the Gibbs
  populations of the full-secular steady state;
* the single-reservoir partial-secular steady state: populations,
  p0 = rho_{+-} + rho_{-+}, and the purely imaginary part of rho_{+-};
  these are the exact stationary solution of the partial-secular
  equation with the true occupations n(w_s +- Omega);
* the near-degenerate (flattened-occupation) heat currents of the
  both-damped configuration and their full/partial-secular ratio.  The
  net current follows the difference convention J = Tr[H (D_hot -
  D_cold) rho], which at steady state is twice the through-flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bath import BathSpec, FullSecular, PartialSecular, occupation
from ..lindblad import Superoperator, SystemModel

__all__ = [
    "TwoQubitParams",
    "SIGMA_X",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "build_two_qubit",
    "eigenbasis",
    "to_eigenbasis",
    "two_qubit_analytics",
    "TwoQubitAnalytics",
    "explicit_partial_secular_dissipator",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])   # |e><g| in the (e, g) basis
_I2 = np.eye(2)
_I4 = np.eye(4)

#: Position of each eigenstate in the fixed (u, +, -, l) ordering.
LEVELS = {"u": 0, "+": 1, "-": 2, "l": 3}


@dataclass(frozen=True)
class TwoQubitParams:
    """Parameters of the coupled-qubit pair and its two reservoirs."""

    omega_s: float          # qubit transition frequency
    coupling: float         # exchange splitting Omega
    gamma_h: float          # damping rate of qubit 1 (hot reservoir)
    gamma_c: float          # damping rate of qubit 2 (cold reservoir)
    t_hot: float
    t_cold: float

    def __post_init__(self):
        if not self.omega_s > 0:
            raise ValueError("omega_s must be positive")
        if self.coupling < 0 or self.coupling >= self.omega_s:
            raise ValueError("the exchange coupling must satisfy 0 <= Omega < omega_s")
        if self.gamma_h < 0 or self.gamma_c < 0 or (self.gamma_h == 0 and self.gamma_c == 0):
            raise ValueError("damping rates must be >= 0 with at least one positive")
        if self.t_hot < 0 or self.t_cold < 0:
            raise ValueError("temperatures must be >= 0")

    @property
    def single_reservoir(self) -> bool:
        return self.gamma_h == 0.0 or self.gamma_c == 0.0


def hamiltonian(p: TwoQubitParams) -> np.ndarray:
    """H in the product basis (e1 e2, e1 g2, g1 e2, g1 g2)."""
    sp, sm = SIGMA_PLUS, SIGMA_PLUS.T
    return (0.5 * p.omega_s * (np.kron(SIGMA_Z, _I2) + np.kron(_I2, SIGMA_Z))
            + p.coupling * (np.kron(sp, sm) + np.kron(sm, sp)))


def eigenbasis() -> np.ndarray:
    """Columns (u, +, -, l) expressed in the product basis."""
    u = np.array([1.0, 0.0, 0.0, 0.0])
    plus = np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0)
    minus = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    low = np.array([0.0, 0.0, 0.0, 1.0])
    return np.column_stack([u, plus, minus, low])


def to_eigenbasis(op: np.ndarray) -> np.ndarray:
    """Transform a product-basis operator into the (u, +, -, l) ordering."""
    v = eigenbasis()
    return v.conj().T @ np.asarray(op, dtype=complex) @ v


def default_omega_cut(p: TwoQubitParams) -> float:
    """Partial-secular threshold enclosing the 2 Omega splitting of each sign block."""
    return p.omega_s


def build_two_qubit(p: TwoQubitParams, mode, flattened_occupations: bool = False) -> SystemModel:
    """Assemble the SystemModel; zero-rate couplings are omitted."""
    couplings = []
    if p.gamma_h > 0:
        couplings.append((np.kron(SIGMA_X, _I2),
                          BathSpec(temperature=p.t_hot, rate=p.gamma_h, label="hot")))
    if p.gamma_c > 0:
        couplings.append((np.kron(_I2, SIGMA_X),
                          BathSpec(temperature=p.t_cold, rate=p.gamma_c, label="cold")))
    return SystemModel(
        hamiltonian=hamiltonian(p),
        couplings=tuple(couplings),
        mode=mode,
        flatten_occupations_at=p.omega_s if flattened_occupations else None,
    )


# ----------------------------------------------------------------------
# Closed forms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TwoQubitAnalytics:
    """Closed-form reference values; fields are None outside their regime."""

    partition_function: float
    gibbs_populations: np.ndarray             # (u, +, -, l) order
    p0: float | None                          # rho_{+-} + rho_{-+}, single reservoir
    steady_populations: np.ndarray | None     # single-reservoir partial secular
    coherence_imag_factor: float | None       # (rho_{+-} - rho_{-+}) = factor * i * p0
    reduced_excited_populations: tuple | None  # qubit (1, 2) excited-state populations
    j_secular: float | None                   # both-damped, flattened occupations
    j_partial_secular: float | None
    current_ratio: float | None
    warnings: tuple = ()


def _single_reservoir_temperature(p: TwoQubitParams) -> float:
    return p.t_cold if p.gamma_h == 0.0 else p.t_hot


def partition_function(p: TwoQubitParams, temperature: float | None = None) -> float:
    t = _single_reservoir_temperature(p) if temperature is None else temperature
    if t == 0:
        raise ValueError("partition function requires T > 0")
    return 2.0 * (math.cosh(p.omega_s / t) + math.cosh(p.coupling / t))


def two_qubit_analytics(p: TwoQubitParams) -> TwoQubitAnalytics:
    """Evaluate every closed form available at the given parameters.

    Single-reservoir steady-state formulas need exactly one nonzero rate;
    the both-damped current formulas need both rates and hold in the
    flattened-occupation (Omega << omega_s) regime.  Out-of-regime
    requests fill the corresponding fields with None and add a warning.
    """
    warnings = []
    if p.coupling > p.omega_s / 5.0:
        warnings.append("coupling above omega_s/5: near-degenerate closed forms degrade")

    t_ref = _single_reservoir_temperature(p)
    z = partition_function(p, t_ref)
    energies = np.array([p.omega_s, p.coupling, -p.coupling, -p.omega_s])
    gibbs = np.exp(-energies / t_ref)
    gibbs /= gibbs.sum()

    p0 = steady_pops = imag_factor = reduced = None
    if p.single_reservoir:
        gamma = p.gamma_c if p.gamma_h == 0.0 else p.gamma_h
        n_plus = occupation(p.omega_s + p.coupling, t_ref)
        n_minus = occupation(p.omega_s - p.coupling, t_ref)
        n_mid = occupation(p.omega_s, t_ref)
        s = n_plus + n_minus + 1.0
        prod = (2.0 * n_minus + 1.0) * (2.0 * n_plus + 1.0)
        big_r = 16.0 * p.coupling**2 / (s * gamma**2) + s
        p0 = (1.0 - (2.0 * n_mid + 1.0) * s / prod) / (big_r - (2.0 * n_mid + 1.0) ** 2 * s / prod)
        imag_factor = -4.0 * p.coupling / (s * gamma)
        half = n_mid + 0.5
        steady_pops = gibbs + p0 * np.array([
            -1.0 / (4.0 * s) + half * (n_plus + n_minus + 0.5) / prod,
            +1.0 / (4.0 * s) + half * (n_minus - n_plus + 0.5) / prod,
            +1.0 / (4.0 * s) + half * (n_plus - n_minus + 0.5) / prod,
            -1.0 / (4.0 * s) - half * (n_plus + n_minus + 1.5) / prod,
        ])
        # reduced qubit states: excited population of qubit n carries
        # -+(-1)^n p0 (Z(0) - (-1)^n Z(Omega)) / 2 on top of the symmetric part
        z0 = 2.0 * math.cosh(p.omega_s / t_ref) + 2.0
        base = math.exp(-p.omega_s / t_ref) + math.cosh(p.coupling / t_ref)
        reduced = tuple(
            (base + 0.5 * p0 * (z0 - (-1.0) ** n * z)) / z for n in (1, 2)
        )
    else:
        warnings.append("single-reservoir steady-state forms need gamma_h = 0 or gamma_c = 0")

    j_sec = j_par = ratio = None
    if not p.single_reservoir:
        n_h = occupation(p.omega_s, p.t_hot) if p.t_hot > 0 else 0.0
        n_c = occupation(p.omega_s, p.t_cold) if p.t_cold > 0 else 0.0
        n_bar = (p.gamma_h * n_h + p.gamma_c * n_c) / (p.gamma_h + p.gamma_c)
        j_sec = (2.0 * p.gamma_c * p.gamma_h * p.omega_s * (n_h - n_c)
                 / ((p.gamma_h + p.gamma_c) * (2.0 * n_bar + 1.0)))
        ratio = 4.0 * p.coupling**2 / (
            (2.0 * n_c + 1.0) * (2.0 * n_h + 1.0) * p.gamma_h * p.gamma_c
            + 4.0 * p.coupling**2)
        j_par = j_sec * ratio
    else:
        warnings.append("both-damped current forms need gamma_h > 0 and gamma_c > 0")

    return TwoQubitAnalytics(
        partition_function=z,
        gibbs_populations=gibbs,
        p0=p0,
        steady_populations=steady_pops,
        coherence_imag_factor=imag_factor,
        reduced_excited_populations=reduced,
        j_secular=j_sec,
        j_partial_secular=j_par,
        current_ratio=ratio,
        warnings=tuple(warnings),
    )


# ----------------------------------------------------------------------
# Hand-expanded partial-secular dissipator (independent oracle)
# ----------------------------------------------------------------------

def _level_op(a: str, b: str) -> np.ndarray:
    """|a><b| over the (u, +, -, l) labels, in the product basis."""
    v = eigenbasis()
    out = np.zeros((4, 4))
    out[LEVELS[a], LEVELS[b]] = 1.0
    return v @ out @ v.conj().T


def _sand(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator matrix of rho -> A rho B."""
    return np.kron(np.asarray(b, complex).T, np.asarray(a, complex))


def _acomm(k: np.ndarray) -> np.ndarray:
    """Superoperator matrix of rho -> {K, rho}."""
    return _sand(k, _I4) + _sand(_I4, k)


def _lindblad_line(rate: float, ops: list) -> np.ndarray:
    """rate * (sum_C C rho C^dagger - 1/2 {sum_C C^dagger C, rho})."""
    total = np.zeros((16, 16), dtype=complex)
    anti = np.zeros((4, 4), dtype=complex)
    for c in ops:
        total += rate * _sand(c, c.conj().T)
        anti += c.conj().T @ c
    total -= 0.5 * rate * _acomm(anti)
    return total


def explicit_partial_secular_dissipator(p: TwoQubitParams) -> Superoperator:
    """Both-damped partial-secular dissipator as an explicit |a><b| term list.

    Written out transition by transition with hand-derived coefficients in
    the mean rate gbar = (gamma_h + gamma_c)/2 and the combinations

        nbar(w) = (gamma_h n_h(w) + gamma_c n_c(w)) / (2 gbar)
        dn(w)   = (gamma_h n_h(w) - gamma_c n_c(w)) / gbar
        dgamma  = (gamma_h - gamma_c) / gbar ,

    fully independent of the eigenoperator engine; serves as an
    operator-level oracle for the generic construction (hot reservoir on
    qubit 1, cold on qubit 2, both within one near-degenerate block).
    """
    gh, gc = p.gamma_h, p.gamma_c
    gbar = 0.5 * (gh + gc)

    def n_h(w):
        return occupation(w, p.t_hot) if p.t_hot > 0 else 0.0

    def n_c(w):
        return occupation(w, p.t_cold) if p.t_cold > 0 else 0.0

    def nbar(w):
        return (gh * n_h(w) + gc * n_c(w)) / (2.0 * gbar)

    def dn(w):
        return (gh * n_h(w) - gc * n_c(w)) / gbar

    dgamma = (gh - gc) / gbar
    w_hi = p.omega_s + p.coupling
    w_lo = p.omega_s - p.coupling
    w_mid = p.omega_s
    lop = _level_op

    d = np.zeros((16, 16), dtype=complex)

    # Diagonal frequency channels (the full-secular content).
    d += _lindblad_line((nbar(w_hi) + 1.0) * gbar, [lop("l", "+"), lop("-", "u")])
    d += _lindblad_line((nbar(w_lo) + 1.0) * gbar, [lop("+", "u"), lop("l", "-")])
    d += _lindblad_line(nbar(w_lo) * gbar, [lop("u", "+"), lop("-", "l")])
    d += _lindblad_line(nbar(w_hi) * gbar, [lop("+", "l"), lop("u", "-")])
    # Cross sandwiches inside each diagonal channel (no anticommutator parts:
    # the corresponding operator products vanish identically).
    d += 0.5 * (dn(w_lo) + dgamma) * gbar * (
        _sand(lop("+", "u"), lop("-", "l")) + _sand(lop("l", "-"), lop("u", "+")))
    d += 0.5 * dn(w_lo) * gbar * (
        _sand(lop("u", "+"), lop("l", "-")) + _sand(lop("-", "l"), lop("+", "u")))
    d -= 0.5 * (dn(w_hi) + dgamma) * gbar * (
        _sand(lop("l", "+"), lop("u", "-")) + _sand(lop("-", "u"), lop("+", "l")))
    d -= 0.5 * dn(w_hi) * gbar * (
        _sand(lop("+", "l"), lop("-", "u")) + _sand(lop("u", "-"), lop("l", "+")))

    # Off-diagonal frequency channels at the mean frequency w_s (the terms
    # beyond the full-secular form).
    d += (nbar(w_mid) + 1.0) * gbar * (
        _sand(lop("l", "+"), lop("u", "+")) + _sand(lop("+", "u"), lop("+", "l"))
        - _sand(lop("-", "u"), lop("-", "l")) - _sand(lop("l", "-"), lop("u", "-")))
    d += nbar(w_mid) * gbar * (
        _sand(lop("+", "l"), lop("+", "u")) + _sand(lop("u", "+"), lop("l", "+"))
        - _sand(lop("u", "-"), lop("l", "-")) - _sand(lop("-", "l"), lop("-", "u")))
    d += 0.5 * dn(w_mid) * gbar * (
        _sand(lop("l", "+"), lop("-", "l")) + _sand(lop("l", "-"), lop("+", "l"))
        + _sand(lop("+", "l"), lop("l", "-")) + _sand(lop("-", "l"), lop("l", "+"))
        - _sand(lop("u", "+"), lop("-", "u")) - _sand(lop("u", "-"), lop("+", "u"))
        - _sand(lop("+", "u"), lop("u", "-")) - _sand(lop("-", "u"), lop("u", "+")))
    # Rate-asymmetry completion: present only when gamma_h != gamma_c.
    d -= 0.5 * dgamma * gbar * (
        _sand(lop("+", "u"), lop("u", "-")) + _sand(lop("-", "u"), lop("u", "+"))
        - _sand(lop("l", "-"), lop("+", "l")) - _sand(lop("l", "+"), lop("-", "l")))
    d -= 0.25 * dgamma * gbar * _acomm(lop("+", "-") + lop("-", "+"))

    return Superoperator(4, d)
