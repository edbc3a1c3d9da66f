"""
Spin-noise spectra from the quantum regression theorem.

Convention: ``S(nu) = int R(tau) exp(-i 2 pi nu tau) dtau`` with ``nu`` in Hz,
so ``int S(nu) dnu`` over the whole real line equals the equal-time
covariance. Spectra are two-sided unless a name says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .drift import DriftSystem
from .equilibrium import CovarianceBlock
from .operators import cartesian_projection
from .optics import ProbeCouplings

__all__ = [
    "CartesianSpectrum",
    "SpectrumTrace",
    "spherical_spectrum",
    "qrt_spectrum",
    "measured_psd",
    "resonance_frequency",
    "slowest_mode",
    "frequency_grid",
    "NoiseDip",
    "noise_dip",
]


def _live(system: DriftSystem) -> np.ndarray:
    lay = system.layout
    n = lay.dim
    ph = set(lay.phantom)
    idx = [k for k, s in enumerate(lay.slots) if s not in ph]
    return np.array(idx + [n + k for k in idx])


def spherical_spectrum(system: DriftSystem, cov: CovarianceBlock, freqs) -> np.ndarray:
    """``-(-A + i w)^-1 (A R0 + R0 A^T) (-A^T - i w)^-1`` for each frequency.

    Returns an array of shape ``(len(freqs), 2n, 2n)``; phantom slots of a
    padded layout are left at zero.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    live = _live(system)
    A = system.A_combined[np.ix_(live, live)]
    R0 = cov.R0[np.ix_(live, live)]
    Q = A @ R0 + R0 @ A.T
    eye = np.eye(len(live))
    iw = (2j * np.pi * freqs)[:, None, None]
    left = np.linalg.solve(-A[None] + iw * eye, np.broadcast_to(Q, (len(freqs),) + Q.shape))
    # X (-A^T - i w)^-1 = [(-A - i w)^-1 X^T]^T
    S = -np.swapaxes(np.linalg.solve(-A[None] - iw * eye, np.swapaxes(left, 1, 2)), 1, 2)
    n2 = system.A_combined.shape[0]
    out = np.zeros((len(freqs), n2, n2), dtype=complex)
    out[:, live[:, None], live[None, :]] = S
    return out


@dataclass(frozen=True)
class CartesianSpectrum:
    """Single-atom two-sided spectra of the x spin components (real parts)."""

    freqs: np.ndarray
    S_aa: np.ndarray
    S_bb: np.ndarray
    S_ab: np.ndarray
    S_ba: np.ndarray
    full: np.ndarray = field(repr=False)  # (nf, 4, 4) complex, order [Fx_a, Fx_b, Fy_a, Fy_b]


def qrt_spectrum(system: DriftSystem, cov: CovarianceBlock, freqs) -> CartesianSpectrum:
    """Cartesian spin spectra ``Mcal S_sph Mcal^T``."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    _, _, Mcal = cartesian_projection(system.layout)
    Ssph = spherical_spectrum(system, cov, freqs)
    full = np.einsum("ai,kij,bj->kab", Mcal, Ssph, Mcal)
    re = full.real
    return CartesianSpectrum(
        freqs=freqs, S_aa=re[:, 0, 0], S_bb=re[:, 1, 1],
        S_ab=re[:, 0, 1], S_ba=re[:, 1, 0], full=full,
    )


@dataclass(frozen=True)
class SpectrumTrace:
    """Measured polarimeter PSD and its spin-noise ingredients (two-sided).

    ``S_eff`` is the probe-weighted single-atom spin spectrum
    ``D_a^2 S_aa + D_b^2 S_bb - D_a D_b (S_ab + S_ba)``; ``S_measured`` adds
    photon shot noise ``psn_floor = Phi / 2`` to ``Phi^2 N G^2 S_eff / 4``.
    """

    freqs: np.ndarray
    S_spin_aa: np.ndarray
    S_spin_bb: np.ndarray
    S_cross: np.ndarray
    S_eff: np.ndarray
    S_measured: np.ndarray
    psn_floor: float

    @property
    def S_eff_one_sided(self) -> np.ndarray:
        return 2 * self.S_eff

    @property
    def S_measured_one_sided(self) -> np.ndarray:
        return 2 * self.S_measured

    @property
    def spin_part(self) -> np.ndarray:
        return self.S_measured - self.psn_floor


def measured_psd(spec: CartesianSpectrum, couplings: ProbeCouplings, N_at: float, Phi: float) -> SpectrumTrace:
    """Polarimeter PSD with photon shot noise for ``N_at`` uncorrelated atoms."""
    if not N_at > 0:
        raise ValueError("N_at must be positive")
    Da, Db = couplings.D_a, couplings.D_b
    cross = spec.S_ab + spec.S_ba
    S_eff = Da * Da * spec.S_aa + Db * Db * spec.S_bb - Da * Db * cross
    psn = Phi / 2
    meas = psn + Phi * Phi / 4 * N_at * couplings.G ** 2 * S_eff
    return SpectrumTrace(
        freqs=spec.freqs, S_spin_aa=spec.S_aa, S_spin_bb=spec.S_bb, S_cross=cross,
        S_eff=S_eff, S_measured=meas, psn_floor=psn,
    )


def slowest_mode(system: DriftSystem) -> complex:
    """Eigenvalue of ``A_1`` with the smallest decay rate."""
    live = _live(system)[: len(_live(system)) // 2]
    ev = np.linalg.eigvals(system.A1[np.ix_(live, live)])
    return complex(ev[np.argmax(ev.real)])


def resonance_frequency(system: DriftSystem) -> float:
    """``|Im lambda_slow| / 2 pi`` in Hz."""
    return abs(slowest_mode(system).imag) / (2 * np.pi)


def frequency_grid(system: DriftSystem, n: int = 2001, span: float = 5.0, dense: int = 400) -> np.ndarray:
    """Linear grid on ``[0, span * nu_res]`` merged with a dense patch at resonance.

    The dense patch covers ``nu_res +- 3`` slow-mode linewidths.
    """
    lam = slowest_mode(system)
    nu_res = abs(lam.imag) / (2 * np.pi)
    width = abs(lam.real) / (2 * np.pi)
    top = span * max(nu_res, width)
    base = np.linspace(0.0, top, n)
    lo, hi = max(0.0, nu_res - 3 * width), min(top, nu_res + 3 * width)
    patch = np.linspace(lo, hi, dense) if hi > lo else np.empty(0)
    return np.unique(np.concatenate([base, patch]))


@dataclass(frozen=True)
class NoiseDip:
    """Local minimum of a spectrum: position and fractional depth.

    ``depth = prominence / (S_min + prominence)``, i.e. how far the minimum
    sits below the lower of its two bounding maxima, relative to that maximum.
    """

    frequency: float
    depth: float
    prominence: float


def noise_dip(freqs, S, nu_res: float, window=(0.5, 1.5)) -> NoiseDip | None:
    """Most prominent local minimum of ``S`` within ``window * nu_res``, or ``None``."""
    freqs = np.asarray(freqs, dtype=float)
    S = np.asarray(S, dtype=float)
    idx, props = find_peaks(-S, prominence=0)
    lo, hi = window[0] * nu_res, window[1] * nu_res
    best = None
    for k, prom in zip(idx, props["prominences"]):
        if lo < freqs[k] < hi and (best is None or prom > best[1]):
            best = (k, prom)
    if best is None:
        return None
    k, prom = best
    return NoiseDip(frequency=float(freqs[k]), depth=float(prom / (S[k] + prom)), prominence=float(prom))
