"""Bosonic reservoir models and the coarse-grained rate matrix gamma_mn.

A reservoir is specified by its temperature, a flat damping rate gamma and
a spectral-density model (flat, or Ohmic with exponential high-frequency
cutoff).  The central object is the Hermitian, positive-semidefinite rate
matrix gamma_mn multiplying the sandwich terms X_m rho X_n^dagger of the
dissipator.  Three coarse-graining modes are supported:

``Exact(dt)``
    gamma_mn evaluated from the finite-window double time integral over
    the reservoir correlation function (reduced to a single tau integral),
    for a finite coarse-graining interval dt.

``FullSecular()``
    dt much longer than every inverse frequency difference: only diagonal
    entries gamma_nn = gamma(|w_n|) (n(|w_n|) + theta(-w_n)) survive.

``PartialSecular(omega_cut)``
    dt between the fast system timescale and the slow internal timescale:
    off-diagonal entries survive for same-sign frequency pairs closer than
    omega_cut, with the occupation number evaluated at the mean frequency,
    gamma_mn = gamma(|w|) (n(|w|) + theta(-w)), w = (w_m + w_n)/2.  The
    mean-frequency evaluation is what keeps the matrix positive
    semidefinite.

Units: hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .linalg import NumericalFailureError, hermiticity_defect
from .bohr import BohrDecomposition

__all__ = [
    "BathSpec",
    "Exact",
    "FullSecular",
    "PartialSecular",
    "GammaMatrix",
    "occupation",
    "spectral_density",
    "coupling_rate",
    "correlation_function",
    "estimate_tau_c",
    "gamma_exact",
    "gamma_limit",
    "build_gamma_matrix",
    "gamma_convergence_scan",
]


# ----------------------------------------------------------------------
# Coarse-graining modes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Exact:
    """Finite coarse-graining interval dt; rates from the windowed integral."""
    dt: float

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"coarse-graining interval must be positive, got {self.dt}")


@dataclass(frozen=True)
class FullSecular:
    """Limit dt >> 1/|w_mn| for every frequency difference: diagonal rates only."""


@dataclass(frozen=True)
class PartialSecular:
    """Limit keeping off-diagonal rates for same-sign pairs with |w_m - w_n| <= omega_cut."""
    omega_cut: float

    def __post_init__(self):
        if not (self.omega_cut >= 0):
            raise ValueError(f"omega_cut must be >= 0, got {self.omega_cut}")


# ----------------------------------------------------------------------
# Reservoir specification
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BathSpec:
    """Thermal reservoir: temperature, flat rate and spectral-density model.

    ``rate`` is the flat damping rate gamma, related to the spectral
    density by gamma(w) = 2 pi g(w)^2; for the flat model g^2 = rate/2pi
    at every frequency.  The Ohmic model g^2(w) = eta w exp(-w/cutoff)/2pi
    is required for time-domain quantities (correlation function, exact
    rates, correlation-time estimate).
    """

    temperature: float
    rate: float
    label: str = "bath"
    spectral: str = "flat"          # "flat" or "ohmic"
    eta: float = 1.0                # ohmic strength
    cutoff: float = 10.0            # ohmic high-frequency cutoff

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not (self.rate > 0):
            raise ValueError(f"rate must be > 0, got {self.rate}")
        if self.spectral not in ("flat", "ohmic"):
            raise ValueError(f"unknown spectral model {self.spectral!r}")
        if self.spectral == "ohmic" and not (self.cutoff > 0 and self.eta > 0):
            raise ValueError("ohmic model needs eta > 0 and cutoff > 0")

    def _require_ohmic(self, what: str):
        if self.spectral != "ohmic":
            raise ValueError(f"{what} requires an ohmic spectral model, bath has {self.spectral!r}")


def occupation(omega: float, temperature: float) -> float:
    """Planck occupation number n(w) = 1/(exp(w/T) - 1); zero at T = 0."""
    if not omega > 0:
        raise ValueError(f"occupation requires omega > 0, got {omega}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700:          # underflows to zero occupation
        return 0.0
    return 1.0 / math.expm1(x)


def spectral_density(omega: float, bath: BathSpec) -> float:
    """Coupling density g(w)^2, normalised so that 2 pi g^2 is the damping rate."""
    if omega < 0:
        raise ValueError(f"spectral density defined for omega >= 0, got {omega}")
    if bath.spectral == "flat":
        return bath.rate / (2.0 * math.pi)
    return bath.eta * omega * math.exp(-omega / bath.cutoff) / (2.0 * math.pi)


def coupling_rate(omega: float, bath: BathSpec) -> float:
    """Frequency-resolved damping rate gamma(w) = 2 pi g(w)^2."""
    return 2.0 * math.pi * spectral_density(omega, bath)


# ----------------------------------------------------------------------
# Time-domain quantities (Ohmic only)
# ----------------------------------------------------------------------

def correlation_function(tau: float, bath: BathSpec) -> complex:
    """Reservoir correlation function G(tau) for an Ohmic bath.

    G(tau) = int_0^inf g^2(w) [(2 n(w) + 1) cos(w tau) - i sin(w tau)] dw.

    The imaginary part is temperature independent and evaluated in closed
    form together with the full T = 0 result,

        G_vac(tau) = (eta / 2 pi) / (1/w_c + i tau)^2 ;

    at T > 0 only the real part needs quadrature (absolute tolerance
    1e-10 of the T = 0 magnitude G(0) scale).  G obeys G(-tau) = G(tau)*.
    """
    bath._require_ohmic("correlation function")
    pref = bath.eta / (2.0 * math.pi)
    a = 1.0 / bath.cutoff
    vac = pref / (a + 1j * tau) ** 2
    t = bath.temperature
    if t == 0.0:
        return complex(vac)

    # real part: int_0^inf (eta/2pi) w e^{-w/wc} coth(w/2T) cos(w tau) dw
    def envelope(w: float) -> float:
        x = w / (2.0 * t)
        if x < 1e-8:
            core = 2.0 * t + w * x / 3.0     # w coth(w/2T) ~ 2T + w^2/(6T)
        else:
            core = w / math.tanh(x)
        return pref * core * math.exp(-w / bath.cutoff)

    scale = pref * bath.cutoff**2 * (1.0 + 2.0 * t / bath.cutoff)
    abs_tau = abs(tau)
    if abs_tau == 0.0:
        real, _ = integrate.quad(envelope, 0.0, np.inf, epsabs=1e-10 * scale,
                                 epsrel=1e-12, limit=400)
    else:
        real, _ = integrate.quad(envelope, 0.0, np.inf, weight="cos", wvar=abs_tau,
                                 epsabs=1e-10 * scale, epsrel=1e-12, limit=400)
    # the odd (imaginary) part is temperature independent; the closed form
    # in ``vac`` already carries the correct sign for either sign of tau
    return complex(real, vac.imag)


def estimate_tau_c(bath: BathSpec) -> float:
    """Width estimate of the correlation function: the timescale tau_c.

    Returns int |G(tau)+G(-tau)| tau dtau / int |G(tau)+G(-tau)| dtau with
    G(tau) + G(-tau) = 2 Re G(tau).  The exponential-cutoff Ohmic model
    has an algebraic 1/tau^2 tail in Re G which makes the numerator grow
    logarithmically, so both integrals run over the finite support window
    [0, 50 (1/w_c + 1/2piT)] that contains the bulk of the correlation
    mass; the result is an order-of-magnitude diagnostic.
    """
    bath._require_ohmic("correlation-time estimate")
    t = bath.temperature
    width = 1.0 / bath.cutoff + (1.0 / (2.0 * math.pi * t) if t > 0 else 0.0)
    upper = 50.0 * width

    def weight(tau: float) -> float:
        return abs(2.0 * correlation_function(tau, bath).real)

    kwargs = dict(epsrel=1e-8, epsabs=0.0, limit=400)
    num, _ = integrate.quad(lambda u: weight(u) * u, 0.0, upper, **kwargs)
    den, _ = integrate.quad(weight, 0.0, upper, **kwargs)
    return num / den


# ----------------------------------------------------------------------
# Rate matrix entries
# ----------------------------------------------------------------------

def _window_factor(omega_mn: float, dt: float, tau: float) -> complex:
    """The finite-window factor (e^{i w dt} e^{-i w tau/2} - e^{i w tau/2}) / (i w dt).

    Evaluated in a cancellation-free form; reduces to 1 - tau/dt as
    w = omega_mn -> 0.
    """
    x = omega_mn * (dt - tau)
    if omega_mn == 0.0:
        return complex(1.0 - tau / dt)
    # e^{i w tau/2} (e^{i x} - 1) / (i w dt) with expm1 split for stability
    expm1_ix = complex(-2.0 * math.sin(0.5 * x) ** 2, math.sin(x))
    return np.exp(0.5j * omega_mn * tau) * expm1_ix / (1j * omega_mn * dt)


def gamma_exact(omega_m: float, omega_n: float, dt: float, bath: BathSpec) -> complex:
    """Coarse-grained rate gamma_mn(dt) from the windowed correlation integral.

    Single tau-integral form of the defining double time integral

        (1/dt) int_0^dt int_0^dt G(t2 - t1) e^{i w_m t1 - i w_n t2} dt1 dt2,

    namely int_0^dt 2 Re[G(tau) e^{-i (w_m+w_n) tau / 2}] K(tau) dtau with
    the window factor K of ``_window_factor``.  Relative accuracy 1e-7 or
    better.  Requires an Ohmic bath (the flat model has no integrable
    correlation function).
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    bath._require_ohmic("exact coarse-grained rates")
    omega_bar = 0.5 * (omega_m + omega_n)
    omega_mn = omega_m - omega_n

    def integrand(tau: float) -> complex:
        g = correlation_function(tau, bath)
        sym = 2.0 * (g * np.exp(-1j * omega_bar * tau)).real
        return sym * _window_factor(omega_mn, dt, tau)

    scale = bath.eta * bath.cutoff**2 / (2.0 * math.pi)
    kwargs = dict(epsabs=1e-12 * scale, epsrel=1e-10, limit=1000)
    re, _ = integrate.quad(lambda u: integrand(u).real, 0.0, dt, **kwargs)
    im, _ = integrate.quad(lambda u: integrand(u).imag, 0.0, dt, **kwargs)
    return complex(re, im)


def gamma_limit(omega_m: float, omega_n: float, bath: BathSpec, mode,
                flatten_at: float | None = None) -> float:
    """Limit-mode rate matrix entry for the frequency pair (w_m, w_n).

    Diagonal pairs give gamma(|w_n|) (n(|w_n|) + theta(-w_n)); in
    ``PartialSecular`` mode, same-sign pairs with |w_m - w_n| <= omega_cut
    give gamma(|w|) (n(|w|) + theta(-w)) at the mean frequency
    w = (w_m + w_n)/2; every other pair gives zero.  ``flatten_at``
    replaces the evaluation frequency |w| by a fixed reference (combining
    occupations at nearly degenerate transitions into one value) while the
    emission/absorption step theta keeps the true sign.
    """
    if omega_m == 0.0 or omega_n == 0.0:
        raise ValueError("zero-frequency channels are excluded from limit-mode rates")
    if isinstance(mode, Exact):
        raise TypeError("gamma_limit handles FullSecular/PartialSecular; use gamma_exact")
    if not isinstance(mode, (FullSecular, PartialSecular)):
        raise TypeError(f"unknown coarse-graining mode {mode!r}")

    scale = max(abs(omega_m), abs(omega_n))
    diagonal = abs(omega_m - omega_n) <= 1e-12 * scale
    if isinstance(mode, FullSecular) and not diagonal:
        return 0.0
    if isinstance(mode, PartialSecular):
        if omega_m * omega_n < 0:
            return 0.0
        if not diagonal and abs(omega_m - omega_n) > mode.omega_cut:
            return 0.0

    omega_bar = 0.5 * (omega_m + omega_n)
    w_eval = abs(omega_bar) if flatten_at is None else flatten_at
    step = 1.0 if omega_bar < 0 else 0.0
    return coupling_rate(w_eval, bath) * (occupation(w_eval, bath.temperature) + step)


# ----------------------------------------------------------------------
# Assembled rate matrix
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GammaMatrix:
    """Hermitian rate matrix gamma_mn over the nonzero Bohr indices.

    ``entries[i, j]`` is gamma_{indices[i], indices[j]}; ``mode`` records
    the coarse-graining mode the entries were built in.  Limit-mode
    matrices are positive semidefinite by construction.
    """

    indices: tuple
    entries: np.ndarray
    mode: object
    zero_block_excluded: bool = False   # coupling had a nonzero X_0, left out here

    def entry(self, m: int, n: int) -> complex:
        return complex(self.entries[self.indices.index(m), self.indices.index(n)])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))[0])

    def validate(self):
        scale = max(self.max_abs(), 1e-300)
        if hermiticity_defect(self.entries) > 1e-12 * scale:
            raise NumericalFailureError("rate matrix lost Hermiticity")
        if not isinstance(self.mode, Exact) and self.min_eigenvalue() < -1e-12 * scale:
            raise NumericalFailureError(
                f"limit-mode rate matrix not PSD (min eig {self.min_eigenvalue():.3e})")
        if isinstance(self.mode, FullSecular):
            off = self.entries - np.diag(np.diag(self.entries))
            if np.any(off != 0.0):
                raise NumericalFailureError("full-secular rate matrix has off-diagonal entries")


def build_gamma_matrix(dec: BohrDecomposition, bath: BathSpec, mode,
                       flatten_at: float | None = None) -> GammaMatrix:
    """Fill the rate matrix over the decomposition's nonzero Bohr indices.

    Limit modes use :func:`gamma_limit`; ``Exact`` mode evaluates
    :func:`gamma_exact` on the upper triangle and mirrors the conjugate.
    A nonvanishing zero-frequency block of the decomposition is excluded
    from the matrix and flagged on the result.
    """
    indices = dec.indices
    if not indices:
        raise ValueError("decomposition has no nonzero Bohr frequencies")
    n = len(indices)
    entries = np.zeros((n, n), dtype=complex)
    if isinstance(mode, Exact):
        for i in range(n):
            for j in range(i, n):
                value = gamma_exact(dec.frequency(indices[i]), dec.frequency(indices[j]),
                                    mode.dt, bath)
                entries[i, j] = value
                entries[j, i] = np.conj(value)
    else:
        for i in range(n):
            for j in range(n):
                entries[i, j] = gamma_limit(dec.frequency(indices[i]),
                                            dec.frequency(indices[j]),
                                            bath, mode, flatten_at=flatten_at)
    g = GammaMatrix(indices=indices, entries=entries, mode=mode,
                    zero_block_excluded=dec.has_zero_block())
    g.validate()
    return g


def gamma_convergence_scan(omega_m: float, omega_n: float, bath: BathSpec,
                           dt_list) -> list[tuple[float, float]]:
    """Deviation of the exact windowed rate from its limit value per dt.

    Returns (dt, |gamma_exact(dt) - gamma_limit|) for each dt; for
    dt much longer than the correlation time the deviation falls off as
    1/dt (the width-over-window correction).
    """
    reference = gamma_limit(omega_m, omega_n, bath, PartialSecular(math.inf))
    out = []
    for dt in dt_list:
        deviation = abs(gamma_exact(omega_m, omega_n, dt, bath) - reference)
        out.append((float(dt), float(deviation)))
    return out
