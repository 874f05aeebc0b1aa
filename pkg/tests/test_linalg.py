import numpy as np
import pytest
from scipy.integrate import solve_ivp

import lindgrain as lg
from lindgrain.linalg import (check_density_matrix, random_density_matrix,
                              random_hermitian, partial_trace)
from lindgrain.models import two_qubit as tq

SZ = np.diag([1.0, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SP = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_hermitian_eig_identity():
    w, v = lg.hermitian_eig(np.eye(2))
    assert np.allclose(w, [1.0, 1.0])
    assert np.max(np.abs(v.conj().T @ v - np.eye(2))) <= 1e-10


def test_hermitian_eig_sigma_z():
    w, v = lg.hermitian_eig(SZ)
    assert np.allclose(w, [-1.0, 1.0])
    # ascending order: ground state |g> first, excited |e> second
    assert abs(abs(v[1, 0]) - 1.0) <= 1e-12
    assert abs(abs(v[0, 1]) - 1.0) <= 1e-12


def test_hermitian_eig_two_qubit_spectrum():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    w, _ = lg.hermitian_eig(tq.hamiltonian(p))
    assert np.allclose(w, [-1.0, -0.1, 0.1, 1.0], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        lg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eig_reconstruction_random():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = random_hermitian(6, rng)
        w, v = lg.hermitian_eig(m)
        defect = np.max(np.abs(v @ np.diag(w) @ v.conj().T - m))
        assert defect <= 1e-10 * np.max(np.abs(m))
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(v.conj().T @ v - np.eye(6))) <= 1e-10


def test_kron_identities():
    assert np.array_equal(lg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(lg.kron(SZ, np.eye(2)), np.diag([1.0, 1.0, -1.0, -1.0]))


def test_kron_against_index_arithmetic():
    a = SP
    b = SZ
    k = lg.kron(a, b)
    for i in range(2):
        for j in range(2):
            for m in range(2):
                for n in range(2):
                    assert k[2 * i + m, 2 * j + n] == a[i, j] * b[m, n]


def test_null_space_zero_matrix():
    vecs = lg.null_space(np.zeros((2, 2)), tol=1e-10)
    assert len(vecs) == 2
    gram = np.array([[u.conj() @ v for v in vecs] for u in vecs])
    assert np.max(np.abs(gram - np.eye(2))) <= 1e-10


def test_null_space_invertible():
    assert lg.null_space(np.diag([1.0, 2.0, 3.0]), tol=1e-10) == []


def test_null_space_of_secular_liouvillian():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    liouv = lg.assemble_liouvillian(tq.build_two_qubit(p, lg.FullSecular()))
    norm = np.linalg.norm(liouv.matrix, 2)
    vecs = lg.null_space(liouv.matrix, tol=1e-10 * norm)
    assert len(vecs) == 1
    assert np.linalg.norm(liouv.matrix @ vecs[0]) <= 10 * 1e-10 * norm


def test_null_space_residual_property():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        m[:, 0] = m[:, 1]            # force a kernel direction in the row space
        tol = 1e-10 * np.linalg.norm(m, 2)
        for v in lg.null_space(m, tol):
            assert np.linalg.norm(m @ v) <= 10 * tol * np.linalg.norm(m, 2)


def test_psd_min_eig_simple():
    assert lg.psd_min_eig(np.eye(2)) == pytest.approx(1.0)
    assert lg.psd_min_eig(np.diag([1.0, -0.5])) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        lg.psd_min_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_min_eig_partial_secular_block():
    p = tq.TwoQubitParams(1.0, 0.1, 0.0, 0.01, 1.0, 1.0)
    model = tq.build_two_qubit(p, lg.PartialSecular(1.0))
    x, bath = model.coupling("cold")
    dec = lg.bohr_decompose(model.hamiltonian, x)
    g = lg.build_gamma_matrix(dec, bath, model.mode)
    assert lg.psd_min_eig(g.entries) >= -1e-12 * g.max_abs()


def test_matexp_apply_trivial():
    v = np.array([1.0, 2.0], dtype=complex)
    assert np.allclose(lg.matexp_apply(np.zeros((2, 2)), v, 5.0), v)
    decayed = lg.matexp_apply(np.diag([-1.0, -1.0]), v, 1.0)
    assert np.allclose(decayed, v * np.exp(-1.0), rtol=1e-12)


def test_matexp_apply_against_ode_integrator():
    rng = np.random.default_rng(3)
    l = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    v0 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    t = 0.3
    direct = lg.matexp_apply(l, v0, t)
    sol = solve_ivp(lambda _, y: l @ y, (0.0, t), v0, rtol=1e-12, atol=1e-12)
    reference = sol.y[:, -1]
    assert np.linalg.norm(direct - reference) <= 1e-8 * np.linalg.norm(reference)


def test_matexp_apply_semigroup():
    rng = np.random.default_rng(5)
    l = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    l /= np.linalg.norm(l, 2)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    split = lg.matexp_apply(l, lg.matexp_apply(l, v, 0.4), 0.7)
    joint = lg.matexp_apply(l, v, 1.1)
    assert np.linalg.norm(split - joint) <= 1e-8 * np.linalg.norm(joint)


def test_matexp_apply_rejects_bad_input():
    with pytest.raises(ValueError):
        lg.matexp_apply(np.eye(2), np.array([1.0, np.nan]), 1.0)
    with pytest.raises(ValueError):
        lg.matexp_apply(np.eye(2), np.array([1.0, 0.0]), -1.0)


def test_density_matrix_validation():
    check_density_matrix(np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([0.7, 0.5]))          # trace
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5]))         # negativity
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 0.1], [0.3, 0.5]]))   # hermiticity


def test_partial_trace_product_state():
    rng = np.random.default_rng(9)
    rho_a = random_density_matrix(2, rng)
    rho_b = random_density_matrix(3, rng)
    joint = np.kron(rho_a, rho_b)
    assert np.max(np.abs(partial_trace(joint, (2, 3), keep=0) - rho_a)) <= 1e-12
    assert np.max(np.abs(partial_trace(joint, (2, 3), keep=1) - rho_b)) <= 1e-12
