"""
Brute-force reference computations on the explicit single-atom Hilbert space.

Everything here works with full density matrices and makes no use of the
multipole bookkeeping in :mod:`spinopm.drift`, so it can serve as an
independent check of the linearized theory.

The ground-state hyperfine frequency is many orders of magnitude faster than
any other rate, which makes the full equation far too stiff to integrate.
By default the hyperfine commutator is therefore replaced by its secular
limit: ``rho`` is projected onto the block-diagonal (``F = F'``) subspace
before and after every evaluation of the remaining terms. The explicit
``A_hfs`` commutator stays available for short unit-level checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .operators import (
    MultipoleLayout,
    electron_spin,
    hilbert_basis,
    manifold_spin,
    nuclear_spin,
    tensor_matrix,
)

__all__ = [
    "OracleModel",
    "master_rhs",
    "partial_trace_electron",
    "fixed_point_residual",
    "numerical_drift",
    "BruteStatics",
    "brute_force_statics",
    "correlation_spectrum_fft",
    "DrivenResult",
    "driven_response",
    "IntegrationError",
    "CheckResult",
    "fft_spectrum_check",
    "driven_checks",
    "dynamic_checks",
]

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator fails."""


@dataclass(frozen=True)
class OracleModel:
    """Parameters of the single-atom master equation.

    Rates and frequencies are in s^-1 / rad s^-1. ``omega_e`` is the electron
    Larmor vector ``g_s mu_B B / hbar``; the manifold Larmor frequency is
    ``omega_e / (2I + 1)``.
    """

    I: float
    R_se: float = 0.0
    R_sd: float = 0.0
    R_op: float = 0.0
    s0: float = 1.0
    omega_e: tuple = (0.0, 0.0, 0.0)
    A_hfs: float = 0.0
    secular: bool = True


def partial_trace_electron(rho: np.ndarray, I: float) -> np.ndarray:
    """Nuclear reduced operator ``Tr_S[rho]`` (uncoupled nuclear basis)."""
    basis = hilbert_basis(I)
    ni = int(round(2 * I + 1))
    r = basis.to_uncoupled(rho).reshape(ni, 2, ni, 2)
    return np.einsum("asbs->ab", r)


def _embed_nuclear(phi: np.ndarray, el: np.ndarray, I: float) -> np.ndarray:
    return hilbert_basis(I).to_coupled(np.kron(phi, el))


def secular_projection(rho: np.ndarray, I: float) -> np.ndarray:
    """Drop hyperfine coherences (``F != F'`` blocks)."""
    basis = hilbert_basis(I)
    out = np.zeros_like(rho)
    for F in (I + 0.5, I - 0.5):
        s = basis.manifold_slice(F)
        out[s, s] = rho[s, s]
    return out


def _raw_rhs(rho: np.ndarray, model: OracleModel, omega_e) -> np.ndarray:
    I = model.I
    S = electron_spin(I)
    out = np.zeros_like(rho, dtype=complex)
    if model.A_hfs:
        IS = sum(n @ s for n, s in zip(nuclear_spin(I), S))
        out += -1j * model.A_hfs * (IS @ rho - rho @ IS)
    if any(omega_e):
        H = sum(w * s for w, s in zip(omega_e, S))
        out += -1j * (H @ rho - rho @ H)
    if model.R_se or model.R_sd or model.R_op:
        phi = partial_trace_electron(rho, I)
        half = np.eye(2) / 2
        alpha = _embed_nuclear(phi, half, I)
        sx, sy, sz = (np.array(m) for m in _pauli_half())
        if model.R_se:
            mean_s = [np.trace(s @ rho) for s in S]
            el = half + 2 * (mean_s[0] * sx + mean_s[1] * sy + mean_s[2] * sz)
            out += model.R_se * (_embed_nuclear(phi, el, I) - rho)
        if model.R_sd:
            out += model.R_sd * (alpha - rho)
        if model.R_op:
            el = half + model.s0 * sz
            out += model.R_op * (_embed_nuclear(phi, el, I) - rho)
    return out


def _pauli_half():
    return (
        [[0, 0.5], [0.5, 0]],
        [[0, -0.5j], [0.5j, 0]],
        [[0.5, 0], [0, -0.5]],
    )


def master_rhs(rho: np.ndarray, model: OracleModel, omega_e=None) -> np.ndarray:
    """Right-hand side of the single-atom master equation.

    Parameters
    ----------
    rho : ndarray
        Density matrix in the coupled basis. Complex-linear extensions (e.g.
        non-Hermitian perturbations) are accepted; the spin-exchange term is
        then bilinear in ``rho``.
    model : OracleModel
    omega_e : sequence of 3 floats, optional
        Instantaneous electron Larmor vector; defaults to ``model.omega_e``.
    """
    w = model.omega_e if omega_e is None else omega_e
    if model.secular:
        return secular_projection(_raw_rhs(secular_projection(rho, model.I), model, w), model.I)
    return _raw_rhs(rho, model, w)


def fixed_point_residual(rho: np.ndarray, model: OracleModel) -> float:
    """``||drho/dt||_F / (R_total ||rho||_F)`` at ``rho``."""
    scale = max(model.R_se + model.R_sd + model.R_op, 1e-300)
    return float(np.linalg.norm(master_rhs(rho, model)) / (scale * np.linalg.norm(rho)))


def numerical_drift(rho0: np.ndarray, model: OracleModel, layout: MultipoleLayout, eps: float = 1e-4) -> np.ndarray:
    """Drift matrix ``A[j, k] = Tr[T_j D(T_k^dag)]`` by central differences.

    ``D`` is the Frechet derivative of :func:`master_rhs` at ``rho0``. The
    right-hand side is at most quadratic in ``rho`` so the central
    difference is exact up to rounding. Phantom slots give zero rows/columns.
    """
    I = layout.I
    n = layout.dim
    phantom = set(layout.phantom)
    ops = [
        None if s in phantom else tensor_matrix(L, layout.M, F, F, I)
        for s, (L, F) in zip(layout.slots, layout.slots)
    ]
    A = np.zeros((n, n), dtype=complex)
    for k, Tk in enumerate(ops):
        if Tk is None:
            continue
        d = Tk.conj().T
        D = (master_rhs(rho0 + eps * d, model) - master_rhs(rho0 - eps * d, model)) / (2 * eps)
        for j, Tj in enumerate(ops):
            if Tj is not None:
                A[j, k] = np.trace(Tj @ D)
    return A


# --------------------------------------------------------------------------
# statics by direct traces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BruteStatics:
    """Direct-trace statistics of a density matrix."""

    multipoles: dict
    var_x: tuple
    var_y: tuple
    mean_transverse: tuple
    Sigma: np.ndarray = field(repr=False)


def brute_force_statics(rho: np.ndarray, I: float, layout: MultipoleLayout) -> BruteStatics:
    """Multipoles, transverse variances and symmetrized ``<T_{+1} T_{-1}>`` block."""
    I = float(I)
    mult = {}
    for F in (I + 0.5, I - 0.5):
        for L in range(0, int(round(2 * F)) + 1):
            mult[(L, F)] = float(np.trace(tensor_matrix(L, 0, F, F, I) @ rho).real)
    vx, vy, mt = [], [], []
    for F in (I + 0.5, I - 0.5):
        fx, fy, _ = manifold_spin(I, F)
        mx = np.trace(fx @ rho).real
        my = np.trace(fy @ rho).real
        vx.append(float(np.trace(fx @ fx @ rho).real - mx * mx))
        vy.append(float(np.trace(fy @ fy @ rho).real - my * my))
        mt.append((float(mx), float(my)))
    n = layout.dim
    phantom = set(layout.phantom)
    Sigma = np.zeros((n, n))
    for i, (L, F) in enumerate(layout.slots):
        for j, (Lp, Fp) in enumerate(layout.slots):
            if F != Fp or (L, F) in phantom or (Lp, Fp) in phantom:
                continue
            A = tensor_matrix(L, 1, F, F, I)
            B = tensor_matrix(Lp, -1, F, F, I)
            Sigma[i, j] = 0.5 * np.trace((A @ B + B @ A) @ rho).real
    return BruteStatics(mult, tuple(vx), tuple(vy), tuple(mt), Sigma)


# --------------------------------------------------------------------------
# time-domain correlation spectrum
# --------------------------------------------------------------------------

def _lagged_fft(A, R0, Mcal, dt, n_steps, block):
    n = A.shape[0]
    right = R0 @ Mcal.T
    P = np.empty((block, Mcal.shape[0], n), dtype=complex)
    P[0] = Mcal
    step = expm(A * dt)
    for k in range(1, block):
        P[k] = P[k - 1] @ step
    jump = expm(A * dt * block)
    Rc = np.empty((n_steps, Mcal.shape[0], Mcal.shape[0]), dtype=complex)
    for start in range(0, n_steps, block):
        stop = min(start + block, n_steps)
        Rc[start:stop] = P[: stop - start] @ right
        P = P @ jump
    Rc[0] *= 0.5
    # int_0^inf R(t) e^{-iwt} dt plus the negative-lag half via R(-t) = R(t)^T
    pos = np.fft.fft(Rc, axis=0) * dt
    neg = np.conj(np.fft.fft(np.conj(np.swapaxes(Rc, 1, 2)), axis=0)) * dt
    return np.fft.fftfreq(n_steps, dt), pos + neg


def correlation_spectrum_fft(
    A: np.ndarray,
    R0: np.ndarray,
    Mcal: np.ndarray,
    dt: float,
    n_steps: int,
    block: int = 1024,
    richardson: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian spectrum from ``R(tau) = e^{A tau} R0`` by discrete Fourier transform.

    ``R(-tau) = R(tau)^T`` supplies negative lags. The lag integral uses the
    trapezoid rule; with ``richardson`` the ``O(dt^2)`` error is removed by
    repeating at ``dt / 2`` on the same frequency bins.

    Returns
    -------
    freqs : ndarray
        Non-negative frequencies in Hz, spacing ``1 / (n_steps dt)``.
    S : ndarray, shape (len(freqs), m, m)
        ``Mcal S_sph Mcal^T`` with the same sign convention as the closed form.
    """
    freqs, S = _lagged_fft(A, R0, Mcal, dt, n_steps, block)
    keep = freqs >= 0
    S = S[keep]
    if richardson:
        _, S2 = _lagged_fft(A, R0, Mcal, dt / 2, 2 * n_steps, block)
        S = (4 * S2[: 2 * n_steps][np.flatnonzero(keep)] - S) / 3
    return freqs[keep], S


# --------------------------------------------------------------------------
# driven response by full nonlinear integration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DrivenResult:
    """Demodulated steady-state response of ``<F_x(aa)>`` and ``<F_x(bb)>``.

    ``amplitude[k] * cos(omega t + phase[k])`` fits manifold ``k``'s
    transverse spin along x; ``signal`` combines them with probe weights.
    """

    frequency: float
    amplitude: np.ndarray
    phase: np.ndarray
    signal_amplitude: float
    signal_phase: float
    hermiticity_error: float
    trace_error: float


def driven_response(
    rho0: np.ndarray,
    model: OracleModel,
    nu: float,
    omega_drive: float,
    weights=(1.0, -1.0),
    settle_time: float = 0.0,
    n_periods: int = 20,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> DrivenResult:
    """Integrate the full equation with an x-directed RF field and demodulate.

    The transverse electron Larmor component is ``omega_drive cos(2 pi nu t)``
    along x on top of ``model.omega_e``. Integration starts from ``rho0``,
    runs for ``settle_time`` and then an integer number of periods over which
    ``<F_x(F)>`` is least-squares fitted by ``c cos + s sin``.
    """
    I = model.I
    dim = rho0.shape[0]
    omega = 2 * np.pi * nu
    bz = np.asarray(model.omega_e, dtype=float)
    fx = [manifold_spin(I, F)[0] for F in (I + 0.5, I - 0.5)]

    def f(t, y):
        rho = y.reshape(dim, dim)
        w = (bz[0] + omega_drive * math.cos(omega * t), bz[1], bz[2])
        return master_rhs(rho, model, w).ravel()

    period = 1.0 / nu
    # the default initial-step guess overshoots badly on this stiff problem
    fastest = model.R_se + model.R_sd + model.R_op + float(np.linalg.norm(bz)) + abs(omega_drive)
    first_step = min(period / 64, 0.1 / fastest) if fastest > 0 else period / 64
    n_settle = math.ceil(settle_time / period)
    t_start = n_settle * period
    t_end = t_start + n_periods * period
    samples = 32 * n_periods
    t_eval = np.linspace(t_start, t_end, samples, endpoint=False)
    sol = solve_ivp(
        f, (0.0, t_end), rho0.astype(complex).ravel(), method="DOP853",
        t_eval=t_eval, rtol=rtol, atol=atol, first_step=first_step,
    )
    if not sol.success:
        raise IntegrationError(f"integration failed at nu={nu}: {sol.message}")
    rhos = sol.y.T.reshape(-1, dim, dim)
    herm = float(np.max(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2)))))
    tr = float(np.max(np.abs(np.trace(rhos, axis1=1, axis2=2) - 1)))
    design = np.column_stack([np.cos(omega * t_eval), np.sin(omega * t_eval), np.ones_like(t_eval)])
    amps, phases, coefs = [], [], []
    for op in fx:
        y = np.einsum("ij,kji->k", op, rhos).real
        (c, s, _), *_ = np.linalg.lstsq(design, y, rcond=None)
        coefs.append(complex(c, -s))  # y = Re[(c - i s) e^{i w t}]
        amps.append(abs(complex(c, -s)))
        phases.append(np.angle(complex(c, -s)))
    z = weights[0] * coefs[0] + weights[1] * coefs[1]
    return DrivenResult(
        frequency=nu,
        amplitude=np.array(amps),
        phase=np.array(phases),
        signal_amplitude=abs(z),
        signal_phase=float(np.angle(z)),
        hermiticity_error=herm,
        trace_error=tr,
    )


# --------------------------------------------------------------------------
# comparison against the closed forms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def _live_parts(system):
    lay = system.layout
    idx = [k for k, s in enumerate(lay.slots) if s not in set(lay.phantom)]
    return np.array(idx + [lay.dim + k for k in idx])


def fft_spectrum_check(system, cov, span: float = 5.0, tol: float = 1e-3) -> CheckResult:
    """Max relative deviation of the closed-form Cartesian spectra from the FFT path on ``[0, span nu_res]``."""
    from .operators import cartesian_projection
    from .spectra import qrt_spectrum, resonance_frequency, slowest_mode

    live = _live_parts(system)
    A = system.A_combined[np.ix_(live, live)]
    R0 = cov.R0[np.ix_(live, live)]
    _, _, Mcal = cartesian_projection(system.layout)
    Mcal = Mcal[:, live]
    ev = np.linalg.eigvals(A)
    dt = 0.1 / np.max(np.abs(ev))
    slow = abs(slowest_mode(system).real)
    n = 2 ** int(math.ceil(math.log2(30.0 / slow / dt)))
    n = min(n, 2 ** 19)
    freqs, S = correlation_spectrum_fft(A, R0, Mcal, dt, n)
    keep = freqs <= span * resonance_frequency(system)
    ref = qrt_spectrum(system, cov, freqs[keep]).full
    worst = 0.0
    for i, j in ((0, 0), (1, 1), (0, 1), (1, 0)):
        r = ref[:, i, j].real
        worst = max(worst, float(np.max(np.abs(S[keep, i, j].real - r) / np.abs(r))))
    return CheckResult("qrt_vs_fft_spectrum", worst, tol, f"{int(keep.sum())} bins, dt={dt:.2e} s, n={n}")


def driven_checks(
    state, system, couplings, rates, rel_tol: float = 0.01, phase_tol_deg: float = 2.0,
    linearity_tol: float = 1e-3, drive_fraction: float = 1e-3,
) -> list[CheckResult]:
    """Driven nonlinear integration at ``nu_res`` and ``nu_res +- linewidth`` against ``A_c`` and ``chi``.

    The Rabi frequency is ``drive_fraction`` times the slowest decay rate;
    linearity is checked by halving it at ``nu_res``.
    """
    from .sensing import coherent_response
    from .spectra import slowest_mode

    I = state.I
    n = 2 * I + 1
    lam = slowest_mode(system)
    nu_res = abs(lam.imag) / (2 * math.pi)
    width = abs(lam.real) / (2 * math.pi)
    model = OracleModel(I, rates.R_se, rates.R_sd, rates.R_op, rates.s0, omega_e=(0.0, 0.0, n * system.omega0))
    Om = drive_fraction * abs(lam.real)
    settle = 10.0 / abs(lam.real)
    w = (couplings.D_a, -couplings.D_b)
    out = []
    amps = {}
    for label, nu in (("nu_res-width", nu_res - width), ("nu_res", nu_res), ("nu_res+width", nu_res + width)):
        pred = coherent_response(system, couplings, [nu])
        d = driven_response(state.rho0, model, nu, n * Om, weights=w, settle_time=settle)
        amps[label] = d.signal_amplitude
        rel = abs(d.signal_amplitude / (Om * pred.Ac[0]) - 1)
        dphi = abs(math.degrees(math.remainder(d.signal_phase - pred.chi[0], 2 * math.pi)))
        out.append(CheckResult(f"driven_amplitude@{label}", rel, rel_tol, f"nu={nu:.2f} Hz"))
        out.append(CheckResult(f"driven_phase_deg@{label}", dphi, phase_tol_deg, f"nu={nu:.2f} Hz"))
    half = driven_response(state.rho0, model, nu_res, n * Om / 2, weights=w, settle_time=settle)
    out.append(CheckResult("driven_linearity", abs(2 * half.signal_amplitude / amps["nu_res"] - 1), linearity_tol))
    return out


def dynamic_checks(state, system, cov, couplings, rates, driven: bool = True) -> list[CheckResult]:
    """FFT-spectrum and (optionally) driven-response comparisons."""
    out = [fft_spectrum_check(system, cov)]
    if driven:
        out.extend(driven_checks(state, system, couplings, rates))
    return out
