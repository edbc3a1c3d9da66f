"""
Coherent RF response, lock-in statistics, SNR and magnetic sensitivity.

Response normalization
----------------------
With the probe-weight row ``V = (D_a, -D_b)`` and

    A = Mt (A_1 - i w)^-1 B (i cos b - sin b e^{i phi})
    B' = Mt (A_1^* - i w)^-1 B (-i cos b - sin b e^{i phi})

the steady-state weighted transverse spin is
``(Omega / sqrt 2) Re[V (A + B') e^{i w t}]`` with ``Omega = gamma_F B0``,
where ``B`` is :attr:`DriftSystem.B_drive`. :func:`coherent_response`
therefore reports ``A_c = |V (A + B')| / sqrt 2`` so that the polarimeter
mean is ``(Phi / 2) N gamma_F B0 G A_c cos(w t + chi)``. The closed-form
expression ``2 |V (A + B')|`` is returned alongside as ``Ac_closed_form``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc
from scipy.integrate import trapezoid

from .drift import DriftSystem
from .operators import cartesian_projection
from .optics import ProbeCouplings

__all__ = [
    "DriveSpec",
    "ResponseResult",
    "coherent_response",
    "coherent_response_Ac",
    "filter_function",
    "filter_function_direct",
    "sinc2_filter",
    "LockinResult",
    "filter_integral",
    "signal_amplitude",
    "lockin_statistics",
    "SensitivityReport",
    "snr_and_sensitivity",
    "sql_limit",
    "operational_sensitivity",
    "PerturbationWarning",
]


class PerturbationWarning(UserWarning):
    """Drive amplitude is not small compared with the spin dynamics."""


@dataclass(frozen=True)
class DriveSpec:
    """Transverse field ``B0 [cos b cos(w t) x + sin b cos(w t + phi) y]``."""

    B0_perp: float
    b_angle: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.B0_perp < 0:
            raise ValueError("B0_perp must be non-negative")


@dataclass(frozen=True)
class ResponseResult:
    freqs: np.ndarray
    Ac: np.ndarray
    chi: np.ndarray
    Ac_closed_form: np.ndarray
    script_A: np.ndarray = field(repr=False)
    script_B: np.ndarray = field(repr=False)


def coherent_response(
    system: DriftSystem,
    couplings: ProbeCouplings,
    freqs,
    drive: DriveSpec | None = None,
    gamma_F: float | None = None,
) -> ResponseResult:
    """Response amplitude ``A_c(nu)`` and phase ``chi(nu)``; both rotating terms kept.

    ``chi`` is the phase of the weighted spin signal ``D_a F_x(a) - D_b F_x(b)``
    relative to ``cos(w t)``. If ``gamma_F`` is given, the drive is checked
    for being perturbative.
    """
    drive = drive or DriveSpec(B0_perp=0.0)
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    lay = system.layout
    live = [k for k, s in enumerate(lay.slots) if s not in set(lay.phantom)]
    A1 = system.A1[np.ix_(live, live)]
    B = system.B_drive[live].astype(complex)
    _, Mt, _ = cartesian_projection(lay)
    Mt = Mt[:, live]
    cb, sb = math.cos(drive.b_angle), math.sin(drive.b_angle)
    ep = np.exp(1j * drive.phi)
    eye = np.eye(len(live))
    iw = (2j * np.pi * freqs)[:, None, None]
    xa = np.linalg.solve(A1[None] - iw * eye, np.broadcast_to(B, (len(freqs), len(B)))[..., None])[..., 0]
    xb = np.linalg.solve(A1.conj()[None] - iw * eye, np.broadcast_to(B, (len(freqs), len(B)))[..., None])[..., 0]
    sA = (xa @ Mt.T) * (1j * cb - sb * ep)
    sB = (xb @ Mt.T) * (-1j * cb - sb * ep)
    V = np.array([couplings.D_a, -couplings.D_b])
    z = (sA + sB) @ V
    if gamma_F is not None and drive.B0_perp > 0:
        ev = np.linalg.eigvals(A1)
        scale = min(np.min(np.abs(ev.real)), abs(system.omega0) or np.inf)
        if gamma_F * drive.B0_perp > 0.01 * scale:
            warnings.warn(
                f"drive Rabi frequency {gamma_F * drive.B0_perp:.3e} rad/s is not small "
                f"against the slowest rate {scale:.3e} rad/s",
                PerturbationWarning, stacklevel=2,
            )
    return ResponseResult(
        freqs=freqs, Ac=np.abs(z) / math.sqrt(2), chi=np.angle(z),
        Ac_closed_form=2 * np.abs(z), script_A=sA, script_B=sB,
    )


def coherent_response_Ac(system, couplings, freqs, drive=None) -> np.ndarray:
    """Shorthand for ``coherent_response(...).Ac``."""
    return coherent_response(system, couplings, freqs, drive).Ac


# --------------------------------------------------------------------------
# lock-in filter
# --------------------------------------------------------------------------

def _window_transform(k, T, Tbw):
    # int w(x) e^{i k x} dx for the single-pole filter followed by a length-T average
    k = np.asarray(k, dtype=complex)
    g = 1.0 / Tbw
    decay = math.exp(-T / Tbw)
    past = (1 - decay) / (g + 1j * k)
    small = np.abs(k) * T < 1e-6
    ks = np.where(small, 1.0, k)
    inside_plain = np.where(small, T + 0.5j * k * T * T, (np.exp(1j * ks * T) - 1) / (1j * ks))
    inside_exp = (np.exp(1j * k * T) - decay) / (g + 1j * k)
    return (past + inside_plain - inside_exp) / T


def filter_function_direct(omega, omega_p, T: float, T_bw: float):
    """``|g^(w')|^2`` for the demodulation weight ``g(x) = w(x) cos(w x)``.

    Equivalent to the closed-form filter and numerically stable at
    ``w' = w``; used as its independent check and near-diagonal fallback.
    """
    wp = np.asarray(omega_p, dtype=float)
    gh = 0.5 * (_window_transform(wp + omega, T, T_bw) + _window_transform(wp - omega, T, T_bw))
    return np.abs(gh) ** 2


def filter_function(omega, omega_p, T: float, T_bw: float, switch: float = 1e-2):
    """Closed-form lock-in variance kernel ``F(w, w')`` (both arguments in rad/s).

    ``Var = int_0^inf W(w') F(w, w') dw'`` with ``W`` the one-sided spectrum per
    unit angular frequency. Within ``|w' - w| T < switch`` the removable
    singularity is evaluated with :func:`filter_function_direct`.
    """
    if T <= 0 or T_bw <= 0:
        raise ValueError("T and T_bw must be positive")
    w = float(omega)
    x = np.asarray(omega_p, dtype=float)
    tb, tb2 = T_bw, T_bw ** 2
    d2 = x * x - w * w
    s2 = x * x + w * w
    num = (
        -2 * x * w * (2 * tb2 * s2 + 1) * np.cos((x - w) * T)
        + 2 * x * w * (2 * tb2 * s2 + 1) * np.cos((x + w) * T)
        + 4 * np.cos(x * T) * (
            tb * w * (w * w - x * x) * math.sin(w * T)
            - math.cos(w * T) * (tb2 * x ** 4 + 2 * tb2 * x * x * w * w + tb2 * w ** 4 + x * x)
        )
        + d2 * (math.cos(2 * w * T) * (tb2 * d2 + 1) + 2 * tb * w * math.sin(2 * w * T))
        + (3 * x * x + w * w) * (tb2 * (x * x + 3 * w * w) + 1)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        den = 2 * T * T * d2 * d2 * (tb2 * tb2 * d2 * d2 + 2 * tb2 * s2 + 1)
        out = num / den
    near = (np.abs(x - w) * T < switch) | (np.abs(x + w) * T < switch)
    if np.any(near):
        out = np.where(near, filter_function_direct(w, x, T, T_bw), out)
    return out


def sinc2_filter(omega, omega_p, T: float):
    """``(1/4) sinc^2((w - w') T / 2)``, the long-filter limit near ``w' = w``."""
    u = (np.asarray(omega, dtype=float) - np.asarray(omega_p, dtype=float)) * T / 2
    return 0.25 * np.sinc(u / np.pi) ** 2


def filter_integral(T: float, T_bw: float) -> float:
    """``int_0^inf F(w, w') dw'`` for ``w T_bw >> 1``: ``pi / (2T) (1 - T_bw / T)``.

    Follows from Parseval on the demodulation weight; the ``pi / (2T)`` limit
    additionally needs ``T >> T_bw``.
    """
    return math.pi / (2 * T) * (1 - T_bw / T * (1 - math.exp(-T / T_bw)))


def signal_amplitude(Ac, G: float, Phi: float, N_at: float, gamma_F: float, B0_perp: float):
    """Polarimeter response amplitude ``(Phi / 2) N gamma_F B0 G A_c``."""
    return 0.5 * Phi * N_at * gamma_F * B0_perp * G * np.asarray(Ac, dtype=float)


@dataclass(frozen=True)
class LockinResult:
    """Lock-in output statistics.

    ``mean_K`` is ``a / 2``; ``mean_K_exact`` keeps the finite-``T_bw``
    window and the ``2w`` ripple. ``var_K`` integrates the exact kernel,
    ``var_K_flat`` is the flat-spectrum shortcut ``S'(nu) / (4T)``.
    """

    mean_K: float
    mean_K_exact: float
    var_K: float
    var_K_flat: float


def lockin_statistics(
    S_one_sided,
    nu: float,
    T: float,
    T_bw: float,
    response_amplitude: float = 0.0,
    half_width: float = 2000.0,
    points_per_fringe: int = 24,
) -> LockinResult:
    """Mean and variance of the time-averaged lock-in output at ``nu`` (Hz).

    Parameters
    ----------
    S_one_sided : callable or float
        One-sided measured PSD ``S'(f)`` in signal^2/Hz, or a constant.
    response_amplitude : float
        Amplitude ``a`` of the in-phase coherent signal ``a cos(w t)``,
        e.g. from :func:`signal_amplitude`.
    half_width : float
        The exact variance integrates over ``|f - nu| < half_width / T``.

    Warns
    -----
    RuntimeWarning
        If ``2 pi nu T_bw < 10``, where the sinc^2 and flat shortcuts degrade.
    """
    if T <= 0 or T_bw <= 0:
        raise ValueError("T and T_bw must be positive")
    w = 2 * np.pi * nu
    if w * T_bw < 10:
        warnings.warn(f"omega T_bw = {w * T_bw:.3g} is not >> 1", RuntimeWarning, stacklevel=2)
    if callable(S_one_sided):
        S = S_one_sided
    else:
        c = float(S_one_sided)
        S = lambda f: np.full_like(f, c)  # noqa: E731
    lo = max(0.0, nu - half_width / T)
    hi = nu + half_width / T
    f = np.linspace(lo, hi, max(int(points_per_fringe * (hi - lo) * T) + 1, 2001))
    # dw' = 2 pi df and W(w') = S'(f) / (2 pi) cancel
    var = trapezoid(S(f) * filter_function(w, 2 * np.pi * f, T, T_bw), f)
    var_flat = float(np.asarray(S(np.array([nu])))[0]) / (4 * T)
    gain = 0.5 * (_window_transform(0.0, T, T_bw) + _window_transform(2 * w, T, T_bw)).real
    return LockinResult(
        mean_K=response_amplitude / 2,
        mean_K_exact=float(response_amplitude * gain),
        var_K=float(var),
        var_K_flat=var_flat,
    )


# --------------------------------------------------------------------------
# SNR and sensitivity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityReport:
    """Per-frequency SNR and sensitivity.

    ``SNR``/``delta_B`` follow the closed-form expressions; the ``_composed``
    fields come from ``<K> / sqrt(Var[K])`` with the flat-spectrum variance.
    """

    freqs: np.ndarray
    Ac: np.ndarray
    SNR: np.ndarray
    delta_B_rms_per_sqrtHz: np.ndarray
    SNR_composed: np.ndarray
    delta_B_composed: np.ndarray
    sql_reference: float = float("nan")


def snr_and_sensitivity(
    freqs,
    Ac,
    S_eff_one_sided,
    G: float,
    Phi: float,
    N_at: float,
    gamma_F: float,
    B0_perp: float,
    T: float = 1.0,
    include_psn: bool = True,
    sql_reference: float = float("nan"),
) -> SensitivityReport:
    """SNR and ``delta B_rms / sqrt(BW)`` from response and single-atom spin noise.

    ``S_eff_one_sided`` is the probe-weighted single-atom spin PSD ``S'``.
    ``include_psn=False`` drops photon shot noise (SPN-only limit).
    Where ``A_c = 0`` the sensitivity is ``+inf``.
    """
    if not (Phi > 0 and N_at > 0):
        raise ValueError("Phi and N_at must be positive")
    Ac = np.asarray(Ac, dtype=float)
    Sp = np.asarray(S_eff_one_sided, dtype=float)
    psn = 1.0 / (Phi * G * G * N_at * N_at) if include_psn else 0.0
    with np.errstate(divide="ignore"):
        snr = gamma_F * B0_perp * Ac / (math.sqrt(2 / T) * np.sqrt(2 * psn + Sp / N_at))
        dB = 4 * np.sqrt(psn + Sp / (2 * N_at)) / (gamma_F * Ac)
        snr_c = gamma_F * B0_perp * Ac * math.sqrt(T) / np.sqrt(4 * psn + Sp / N_at)
        dB_c = 2 * np.sqrt(psn + Sp / (4 * N_at)) / (gamma_F * Ac)
    dB = np.where(Ac > 0, dB, np.inf)
    dB_c = np.where(Ac > 0, dB_c, np.inf)
    return SensitivityReport(
        freqs=np.asarray(freqs, dtype=float), Ac=Ac, SNR=snr, delta_B_rms_per_sqrtHz=dB,
        SNR_composed=snr_c, delta_B_composed=dB_c, sql_reference=sql_reference,
    )


def sql_limit(Gamma: float, N_at: float, T: float, F: float, g_F: float) -> float:
    """Standard quantum limit ``hbar / (g_F mu_B sqrt(2F)) sqrt(Gamma / (N T))`` in tesla."""
    for name, v in (("Gamma", Gamma), ("N_at", N_at), ("T", T), ("F", F), ("g_F", g_F)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    mu_B = sc.physical_constants["Bohr magneton"][0]
    return sc.hbar / (g_F * mu_B * math.sqrt(2 * F)) * math.sqrt(Gamma / (N_at * T))


def operational_sensitivity(B_cal_rms: float, peak_psd: float, noise_psd: float) -> float:
    """Sensitivity from a calibration tone in a 1 Hz-bin one-sided spectrum.

    ``B_cal_rms / sqrt(peak / noise)``; the tone must sit on a bin centre.
    """
    return B_cal_rms / math.sqrt(peak_psd / noise_psd)
