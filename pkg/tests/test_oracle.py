import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import random_density_matrix
from spinopm.equilibrium import solve_beta
from spinopm.operators import hilbert_basis, multipole_layout, tensor_matrix
from spinopm.oracle import (
    OracleModel,
    brute_force_statics,
    correlation_spectrum_fft,
    fixed_point_residual,
    master_rhs,
    partial_trace_electron,
    secular_projection,
)


def _dim(I):
    return int(round(2 * (2 * I + 1)))


@pytest.mark.parametrize("secular", [True, False])
def test_rhs_preserves_trace_and_hermiticity(rng, secular):
    I = 1.5
    m = OracleModel(I, R_se=3e3, R_sd=40.0, R_op=70.0, s0=0.8, omega_e=(1e3, -2e2, 5e3),
                    A_hfs=1e4, secular=secular)
    for _ in range(3):
        rho = random_density_matrix(_dim(I), rng)
        d = master_rhs(rho, m)
        assert abs(np.trace(d)) < 1e-9
        assert np.max(np.abs(d - d.conj().T)) < 1e-9


def test_hyperfine_alone_leaves_zeeman_multipoles_fixed(rng):
    I = 1.5
    m = OracleModel(I, A_hfs=2.0e4, secular=False)
    rho = random_density_matrix(_dim(I), rng)
    d = master_rhs(rho, m)
    for F in (I + 0.5, I - 0.5):
        for L in range(0, int(2 * F) + 1):
            for M in range(-L, L + 1):
                assert abs(np.trace(tensor_matrix(L, M, F, F, I) @ d)) < 1e-9


def test_secular_projection_is_idempotent(rng):
    rho = random_density_matrix(8, rng)
    P = secular_projection(rho, 1.5)
    assert np.allclose(secular_projection(P, 1.5), P)
    assert np.trace(P) == pytest.approx(1.0)


def test_partial_trace_of_product_state():
    I = 1.5
    phi = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    el = np.array([[0.7, 0.1], [0.1, 0.3]], dtype=complex)
    rho = hilbert_basis(I).to_coupled(np.kron(phi, el))
    assert np.allclose(partial_trace_electron(rho, I), phi)


@pytest.mark.parametrize("I,p", [(1.5, 0.1), (1.5, 0.7), (2.5, 0.4), (3.5, 0.9)])
def test_spin_temperature_is_fixed_point(I, p):
    st = solve_beta(p, I)
    R_sd = 50.0
    R_op = p * R_sd / (1 - p)
    m = OracleModel(I, R_se=1e5, R_sd=R_sd, R_op=R_op, omega_e=(0, 0, 3e4))
    assert fixed_point_residual(st.rho0, m) < 1e-12


def test_unpolarized_variances_brute_force():
    I = 1.5
    rho = np.eye(8, dtype=complex) / 8
    b = brute_force_statics(rho, I, multipole_layout(I))
    # Tr[F_x^2] / 8 for F = 2 (10/2) and F = 1 (2/2)
    assert b.var_x[0] == pytest.approx(5 / 4)
    assert b.var_x[1] == pytest.approx(1 / 4)
    assert b.var_x == pytest.approx(b.var_y)


def test_stretched_state_variance_brute_force():
    I = 1.5
    basis = hilbert_basis(I)
    k = [i for i, (F, m) in enumerate(basis.coupled) if F == 2 and m == 2][0]
    rho = np.zeros((8, 8), dtype=complex)
    rho[k, k] = 1
    b = brute_force_statics(rho, I, multipole_layout(I))
    assert b.var_x[0] == pytest.approx(1.0)
    assert b.var_x[1] == pytest.approx(0.0, abs=1e-14)


def test_steady_state_unique_from_random_starts(rng):
    I, p = 1.5, 0.5
    R_sd = 100.0
    m = OracleModel(I, R_se=1e3, R_sd=R_sd, R_op=p * R_sd / (1 - p), omega_e=(0, 0, 2e3))
    target = solve_beta(p, I).rho0
    n = _dim(I)
    for _ in range(3):
        # F != F' coherences are frozen in the secular limit
        rho = secular_projection(random_density_matrix(n, rng), I)
        sol = solve_ivp(lambda t, y: master_rhs(y.reshape(n, n), m).ravel(), (0, 1.0), rho.ravel(),
                        method="DOP853", rtol=1e-11, atol=1e-14)
        final = sol.y[:, -1].reshape(n, n)
        assert np.max(np.abs(final - target)) < 1e-8


def test_correlation_fft_single_damped_mode():
    g, w = 30.0, 2 * np.pi * 200.0
    A = np.array([[-g + 1j * w]])
    R0 = np.array([[1.0 + 0j]])
    Mcal = np.array([[1.0 + 0j]])
    dt = 1e-4
    f, S = correlation_spectrum_fft(A, R0, Mcal, dt, 2**15)
    # negative lags use R(-t) = R(t)^T, which for a scalar is R(|t|)
    Om = 2 * np.pi * f
    ref = 1 / (g - 1j * (w - Om)) + 1 / (g - 1j * (w + Om))
    assert np.max(np.abs(S[:, 0, 0] - ref)) / np.max(np.abs(ref)) < 5e-5
