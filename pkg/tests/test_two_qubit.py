import numpy as np
import pytest

import lindgrain as lg
from lindgrain.lindblad import commutator_superoperator
from lindgrain.models import two_qubit as tq

I2 = np.eye(2)
I4 = np.eye(4)
SX = tq.SIGMA_X
SZ = tq.SIGMA_Z
SP = tq.SIGMA_PLUS
SM = SP.T


def dissipator_of(model):
    liouv = lg.assemble_liouvillian(model)
    return liouv.matrix - commutator_superoperator(model.hamiltonian).matrix


def sandwich(a, b):
    return np.kron(np.asarray(b, complex).T, np.asarray(a, complex))


def lindblad_term(rate, c):
    anti = c.conj().T @ c
    return rate * (sandwich(c, c.conj().T)
                   - 0.5 * (sandwich(anti, I4) + sandwich(I4, anti)))


def steady_in_eigenbasis(p, mode, flattened=False):
    model = tq.build_two_qubit(p, mode, flattened_occupations=flattened)
    result = lg.steady_state(lg.assemble_liouvillian(model))
    return tq.to_eigenbasis(result.rho)


# ----------------------------------------------------------------------
# model construction
# ----------------------------------------------------------------------

def test_spectrum_and_eigenvectors():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    w, _ = lg.hermitian_eig(tq.hamiltonian(p))
    assert np.allclose(w, [-1.0, -0.1, 0.1, 1.0], atol=1e-14)
    h_eig = tq.to_eigenbasis(tq.hamiltonian(p))
    assert np.allclose(np.diag(h_eig).real, [1.0, 0.1, -0.1, -1.0], atol=1e-14)


def test_transition_operators_tensor_identity():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    model = tq.build_two_qubit(p, lg.FullSecular())
    x, _ = model.coupling("cold")
    dec = lg.bohr_decompose(model.hamiltonian, x)
    for n in (1, 2):
        predicted = 0.5 * (np.kron(I2, SP) - (-1.0) ** n * np.kron(SP, SZ))
        assert np.max(np.abs(dec.operator(n) - predicted)) <= 1e-12


def test_uncoupled_pair_collapses_to_single_frequency():
    p = tq.TwoQubitParams(1.0, 0.0, 0.0, 0.01, 1.0, 1.0)
    model = tq.build_two_qubit(p, lg.FullSecular())
    x, _ = model.coupling("cold")
    dec = lg.bohr_decompose(model.hamiltonian, x)
    assert dec.n_frequencies == 1
    assert dec.frequency(1) == pytest.approx(1.0)


def test_zero_rate_couplings_are_dropped():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    assert tq.build_two_qubit(p, lg.FullSecular()).labels == ("cold",)
    p2 = tq.TwoQubitParams(1.0, 0.1, 0.02, 0.01, 2.0, 1.0)
    assert tq.build_two_qubit(p2, lg.FullSecular()).labels == ("hot", "cold")


def test_parameter_validation():
    with pytest.raises(ValueError):
        tq.TwoQubitParams(1.0, 1.5, 0.0, 0.01, 1.0, 1.0)     # coupling >= omega_s
    with pytest.raises(ValueError):
        tq.TwoQubitParams(1.0, 0.1, 0.0, 0.0, 1.0, 1.0)      # both rates zero
    with pytest.raises(ValueError):
        tq.TwoQubitParams(-1.0, 0.1, 0.0, 0.01, 1.0, 1.0)


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------

def test_partition_function_limits():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    assert tq.partition_function(p, temperature=1.0) == pytest.approx(
        2.0 * (np.cosh(1.0) + np.cosh(0.1)), rel=1e-14)
    assert tq.partition_function(p, temperature=1e6) == pytest.approx(4.0, rel=1e-9)


def test_p0_vanishes_with_coupling_rate():
    # p0 scales as gamma^2 (up to a small positive convexity correction),
    # so four decades of rate suppress it by slightly more than 1e-8
    weak = tq.two_qubit_analytics(tq.TwoQubitParams(1.0, 0.05, 0.0, 1e-6, 1.0, 1.0))
    strong = tq.two_qubit_analytics(tq.TwoQubitParams(1.0, 0.05, 0.0, 1e-2, 1.0, 1.0))
    assert abs(weak.p0) < 2e-8 * abs(strong.p0)


def test_current_ratio_approaches_unity_for_strong_tunnelling():
    p = tq.TwoQubitParams(1.0, 0.19, 0.004, 0.002, 2.0, 1.0)
    an = tq.two_qubit_analytics(p)
    assert an.current_ratio == pytest.approx(1.0, abs=0.01)


def test_analytics_regime_warnings():
    single = tq.two_qubit_analytics(tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0))
    assert single.j_secular is None
    assert any("both-damped" in w for w in single.warnings)
    wide = tq.two_qubit_analytics(tq.TwoQubitParams(1.0, 0.5, 0.01, 0.01, 2.0, 1.0))
    assert any("omega_s/5" in w for w in wide.warnings)


def test_steady_state_elements_match_closed_forms():
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    rho = steady_in_eigenbasis(p, lg.PartialSecular(1.0))
    an = tq.two_qubit_analytics(p)
    lv = tq.LEVELS
    p0 = (rho[lv["+"], lv["-"]] + rho[lv["-"], lv["+"]]).real
    assert p0 == pytest.approx(an.p0, rel=1e-6)
    assert np.max(np.abs(np.diag(rho).real - an.steady_populations)) <= 1e-9
    # every element absent from the closed-form list vanishes at steady state
    mask = np.zeros((4, 4), dtype=bool)
    mask[np.diag_indices(4)] = True
    mask[lv["+"], lv["-"]] = mask[lv["-"], lv["+"]] = True
    assert np.max(np.abs(rho[~mask])) <= 1e-12


def test_coherence_imaginary_part_relation():
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    rho = steady_in_eigenbasis(p, lg.PartialSecular(1.0))
    an = tq.two_qubit_analytics(p)
    lv = tq.LEVELS
    p0 = rho[lv["+"], lv["-"]] + rho[lv["-"], lv["+"]]
    difference = rho[lv["+"], lv["-"]] - rho[lv["-"], lv["+"]]
    assert abs(difference - 1j * an.coherence_imag_factor * p0) <= 1e-8


def test_secular_reduced_states_are_identical():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    model = tq.build_two_qubit(p, lg.FullSecular())
    rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
    rho_1 = lg.partial_trace(rho, (2, 2), keep=0)
    rho_2 = lg.partial_trace(rho, (2, 2), keep=1)
    assert np.max(np.abs(rho_1 - rho_2)) <= 1e-10


def test_partial_secular_reduced_states_differ():
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    model = tq.build_two_qubit(p, lg.PartialSecular(1.0))
    rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
    an = tq.two_qubit_analytics(p)
    rho_1 = lg.partial_trace(rho, (2, 2), keep=0)
    rho_2 = lg.partial_trace(rho, (2, 2), keep=1)
    assert abs(rho_1[0, 0] - rho_2[0, 0]) > 1e-3 * abs(an.p0)
    # excited-state populations match the reduced-state closed forms
    assert rho_1[0, 0].real == pytest.approx(an.reduced_excited_populations[0], abs=1e-9)
    assert rho_2[0, 0].real == pytest.approx(an.reduced_excited_populations[1], abs=1e-9)


# ----------------------------------------------------------------------
# explicit dissipator oracle
# ----------------------------------------------------------------------

def test_explicit_dissipator_matches_generic_single_reservoir():
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    generic = dissipator_of(tq.build_two_qubit(p, lg.PartialSecular(1.0)))
    explicit = tq.explicit_partial_secular_dissipator(p).matrix
    assert np.max(np.abs(generic - explicit)) <= 1e-12


def test_explicit_dissipator_matches_generic_both_damped():
    p = tq.TwoQubitParams(1.0, 0.05, 0.02, 0.01, 2.0, 1.0)
    generic = dissipator_of(tq.build_two_qubit(p, lg.PartialSecular(1.0)))
    explicit = tq.explicit_partial_secular_dissipator(p).matrix
    assert np.max(np.abs(generic - explicit)) <= 1e-12


def test_equal_rates_and_temperatures_keep_populations_closed():
    # with gamma_h = gamma_c and T_h = T_c there is no population-coherence
    # coupling: diagonal states stay diagonal and the Gibbs state is stationary
    p = tq.TwoQubitParams(1.0, 0.05, 0.01, 0.01, 1.5, 1.5)
    model = tq.build_two_qubit(p, lg.PartialSecular(1.0))
    liouv = lg.assemble_liouvillian(model)
    gibbs = lg.gibbs_state(model.hamiltonian, 1.5)
    assert np.linalg.norm(liouv.matrix @ lg.vec(gibbs)) <= 1e-12
    rng = np.random.default_rng(8)
    pops = rng.random(4)
    diag = tq.eigenbasis() @ np.diag(pops / pops.sum()) @ tq.eigenbasis().conj().T
    image = tq.to_eigenbasis(lg.unvec(liouv.matrix @ lg.vec(diag)))
    off_diagonal = image - np.diag(np.diag(image))
    assert np.max(np.abs(off_diagonal)) <= 1e-14


# ----------------------------------------------------------------------
# near-degenerate operator collapses
# ----------------------------------------------------------------------

def test_partial_secular_collapses_to_local_dissipator():
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    d = dissipator_of(tq.build_two_qubit(p, lg.PartialSecular(1.0),
                                         flattened_occupations=True))
    n = lg.occupation(1.0, 1.0)
    local = (lindblad_term(0.01 * (n + 1.0), np.kron(I2, SM))
             + lindblad_term(0.01 * n, np.kron(I2, SP)))
    assert np.max(np.abs(d - local)) <= 1e-12


def test_full_secular_collapses_to_delocalized_dissipator():
    # both qubits jump; the collapsed form carries half the bare rate per
    # channel (the published expansion overstates these coefficients by 2)
    p = tq.TwoQubitParams(1.0, 0.05, 0.0, 0.01, 1.0, 1.0)
    d = dissipator_of(tq.build_two_qubit(p, lg.FullSecular(),
                                         flattened_occupations=True))
    n = lg.occupation(1.0, 1.0)
    g = 0.01
    delocalized = (
        lindblad_term(0.5 * g * (n + 1.0), np.kron(I2, SM))
        + lindblad_term(0.5 * g * n, np.kron(I2, SP))
        + lindblad_term(0.5 * g * (n + 1.0), np.kron(SM, SZ))
        + lindblad_term(0.5 * g * n, np.kron(SP, SZ))
    )
    assert np.max(np.abs(d - delocalized)) <= 1e-12


# ----------------------------------------------------------------------
# heat currents
# ----------------------------------------------------------------------

def test_both_damped_currents_match_closed_forms():
    p = tq.TwoQubitParams(1.0, 0.05, 0.02, 0.01, 2.0, 1.0)
    an = tq.two_qubit_analytics(p)
    for mode, expected in ((lg.FullSecular(), an.j_secular),
                           (lg.PartialSecular(1.0), an.j_partial_secular)):
        model = tq.build_two_qubit(p, mode, flattened_occupations=True)
        rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
        net = lg.heat_current(model, rho, "hot", "cold").net
        assert net == pytest.approx(expected, rel=1e-10)


def test_current_ratio_denominator_has_no_rate_asymmetry_term():
    # the computed ratio follows 4 Omega^2 / ((2n_c+1)(2n_h+1) g_h g_c + 4 Omega^2);
    # a candidate extra denominator term (1/4)[(2n_h+1)g_h - (2n_c+1)g_c](g_h - g_c)
    # is excluded by direct comparison at strongly asymmetric rates
    p = tq.TwoQubitParams(1.0, 0.05, 0.05, 0.005, 3.0, 0.7)
    n_h = lg.occupation(1.0, 3.0)
    n_c = lg.occupation(1.0, 0.7)
    nets = {}
    for mode in (lg.FullSecular(), lg.PartialSecular(1.0)):
        model = tq.build_two_qubit(p, mode, flattened_occupations=True)
        rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
        nets[type(mode).__name__] = lg.heat_current(model, rho, "hot", "cold").net
    ratio = nets["PartialSecular"] / nets["FullSecular"]
    base = (2 * n_c + 1) * (2 * n_h + 1) * p.gamma_h * p.gamma_c
    extra = 0.25 * ((2 * n_h + 1) * p.gamma_h - (2 * n_c + 1) * p.gamma_c) \
        * (p.gamma_h - p.gamma_c)
    assert ratio == pytest.approx(4 * 0.05**2 / (base + 4 * 0.05**2), rel=1e-10)
    assert abs(ratio - 4 * 0.05**2 / (base + extra + 4 * 0.05**2)) > 1e-3


def test_current_intermediate_expressions():
    # the currents expressed through steady-state elements: secular
    # J = gbar w [dn (rho_ll - rho_uu) - dgamma (rho_uu + rho_++)] and the
    # partial-secular variant with the coherence contribution
    p = tq.TwoQubitParams(1.0, 0.05, 0.02, 0.01, 2.0, 1.0)
    n_h, n_c = lg.occupation(1.0, 2.0), lg.occupation(1.0, 1.0)
    gbar = 0.5 * (p.gamma_h + p.gamma_c)
    dn = (p.gamma_h * n_h - p.gamma_c * n_c) / gbar
    nbar = (p.gamma_h * n_h + p.gamma_c * n_c) / (2 * gbar)
    dgamma = (p.gamma_h - p.gamma_c) / gbar
    lv = tq.LEVELS

    model = tq.build_two_qubit(p, lg.FullSecular(), flattened_occupations=True)
    rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
    net = lg.heat_current(model, rho, "hot", "cold").net
    r = tq.to_eigenbasis(rho)
    expected = gbar * 1.0 * (dn * (r[lv["l"], lv["l"]] - r[lv["u"], lv["u"]])
                             - dgamma * (r[lv["u"], lv["u"]] + r[lv["+"], lv["+"]]))
    assert net == pytest.approx(expected.real, rel=1e-12)

    model = tq.build_two_qubit(p, lg.PartialSecular(1.0), flattened_occupations=True)
    rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
    net = lg.heat_current(model, rho, "hot", "cold").net
    r = tq.to_eigenbasis(rho)
    p0 = (r[lv["+"], lv["-"]] + r[lv["-"], lv["+"]]).real
    expected = gbar * 1.0 * (
        dn * (r[lv["l"], lv["l"]] - r[lv["u"], lv["u"]]).real
        - 0.5 * dgamma * (2 * r[lv["u"], lv["u"]] + r[lv["-"], lv["-"]]
                          + r[lv["+"], lv["+"]]).real
        - (2 * nbar + 1) * p0)
    assert net == pytest.approx(expected, rel=1e-12)


def test_frozen_coupling_pathology():
    base = dict(gamma_h=0.02, gamma_c=0.01, t_hot=2.0, t_cold=1.0)
    nets = {}
    for coupling in (1e-2, 1e-6):
        p = tq.TwoQubitParams(1.0, coupling, **base)
        for mode, tag in ((lg.FullSecular(), "sec"), (lg.PartialSecular(1.0), "par")):
            model = tq.build_two_qubit(p, mode, flattened_occupations=True)
            rho = lg.steady_state(lg.assemble_liouvillian(model)).rho
            nets[(tag, coupling)] = lg.heat_current(model, rho, "hot", "cold").net
    # the full-secular current freezes at a nonzero value as the coupling is
    # switched off, while the partial-secular current shuts down
    assert nets[("sec", 1e-6)] == pytest.approx(nets[("sec", 1e-2)], rel=1e-3)
    assert abs(nets[("par", 1e-6)]) <= 1e-6 * abs(nets[("par", 1e-2)])
