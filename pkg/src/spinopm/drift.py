"""
Linearized drift matrices for the |M| = 1 Zeeman multipoles.

Each matrix is built element by element over the slots of a
:class:`~spinopm.operators.MultipoleLayout`, so physical and padded layouts
share one code path. For slot ``(L, F)`` the spin-exchange row reads::

    -T_L(F) + X_L(FF) sum_f X_L(ff) T_L(f)
    + delta_{L1} Y_1(FF) sum_f Y_1(ff) T_1(f)
    + sum_{Lam = L +- 1} Z_Lam(F; L) <x_Lam>_ST sum_f Y_1(ff) T_1(f)
    + sum_{Lam = L +- 1} Z'_Lam(F; L) <y_1>_ST sum_f X_Lam(ff) T_Lam(f)

with ``<x_Lam>_ST = sum_F X_Lam(FF) <T_Lam0(FF)>_ST`` and
``<y_1>_ST = sum_f Y_1(ff) <T_10(ff)>_ST``. ``Z`` carries
``C^{L1}_{Lam 0; 1 1}`` and ``Z'`` carries ``C^{L1}_{Lam 1; 1 0}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .angular import CouplingCoeffs, ht_coefficients
from .equilibrium import SpinTempState
from .operators import MultipoleLayout, multipole_layout

__all__ = [
    "RateSet",
    "DriftSystem",
    "StabilityWarning",
    "drift_spin_exchange",
    "drift_relaxation_pumping",
    "drift_magnetic",
    "drive_vector",
    "assemble_system",
]


class StabilityWarning(UserWarning):
    """Drift matrix has an eigenvalue with non-negative real part."""


@dataclass(frozen=True)
class RateSet:
    """Relaxation and pumping rates in s^-1; ``s0`` is the pump photon spin along z."""

    R_se: float
    R_sd: float
    R_op: float
    s0: float = 1.0

    def __post_init__(self):
        for name in ("R_se", "R_sd", "R_op"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if not -1 <= self.s0 <= 1:
            raise ValueError(f"s0 must lie in [-1, 1], got {self.s0}")


@dataclass(frozen=True)
class DriftSystem:
    """Linear dynamics ``d<T_1>/dt = A_1 <T_1> + drive``.

    ``A_M`` maps ``M = +1, -1`` to the drift matrices; ``A_combined`` is
    ``diag(A_1, A_1^*)`` acting on ``[T_{+1}, T_{-1}]``.
    """

    layout: MultipoleLayout
    A_M: dict = field(repr=False)
    A_combined: np.ndarray = field(repr=False)
    B_drive: np.ndarray = field(repr=False)
    omega0: float = 0.0
    stable: bool = True

    @property
    def A1(self) -> np.ndarray:
        return self.A_M[1]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``A_1`` sorted by decay rate (slowest first)."""
        ev = np.linalg.eigvals(self.A1)
        return ev[np.argsort(-ev.real)]


def _x_of(coeffs: CouplingCoeffs, L: int, F: float, Fp: float) -> float:
    return coeffs.X.get((L, F, Fp), 0.0)


def _exists(layout: MultipoleLayout, L: int, F: float) -> bool:
    return L <= 2 * F + 1e-9 and (L, F) not in layout.phantom


def drift_spin_exchange(
    state: SpinTempState,
    coeffs: CouplingCoeffs,
    layout: MultipoleLayout,
    R_se: float,
) -> np.ndarray:
    """Linearized spin-exchange drift matrix (identical for ``M = +-1``)."""
    I = layout.I
    a, b = I + 0.5, I - 0.5
    n = layout.dim
    A = np.zeros((n, n))
    Y1 = {F: coeffs.Y.get((1, F, F), 0.0) for F in (a, b)}
    y1_st = sum(Y1[F] * state.multipole(1, F) for F in (a, b))

    def x_st(Lam):
        return sum(_x_of(coeffs, Lam, F, F) * state.multipole(Lam, F) for F in (a, b))

    for i, (L, F) in enumerate(layout.slots):
        if not _exists(layout, L, F):
            continue
        for j, (Lp, Fp) in enumerate(layout.slots):
            if not _exists(layout, Lp, Fp):
                continue
            v = -1.0 if i == j else 0.0
            if Lp == L:
                v += _x_of(coeffs, L, F, F) * _x_of(coeffs, L, Fp, Fp)
            if L == 1 and Lp == 1:
                v += Y1[F] * Y1[Fp]
            for Lam in (L - 1, L + 1):
                if Lam < 1:
                    continue
                if Lp == 1:
                    v += coeffs.Z.get((Lam, F, L), 0.0) * x_st(Lam) * Y1[Fp]
                if Lp == Lam:
                    v += coeffs.Zp.get((Lam, F, L), 0.0) * y1_st * _x_of(coeffs, Lam, Fp, Fp)
            A[i, j] = v
    return R_se * A


def _s_damping(coeffs: CouplingCoeffs, layout: MultipoleLayout) -> np.ndarray:
    n = layout.dim
    A = np.zeros((n, n))
    for i, (L, F) in enumerate(layout.slots):
        if not _exists(layout, L, F):
            continue
        for j, (Lp, Fp) in enumerate(layout.slots):
            if Lp == L and _exists(layout, Lp, Fp):
                A[i, j] = (-1.0 if i == j else 0.0) + _x_of(coeffs, L, F, F) * _x_of(coeffs, L, Fp, Fp)
    return A


def drift_relaxation_pumping(
    coeffs: CouplingCoeffs,
    layout: MultipoleLayout,
    R_sd: float,
    R_op: float,
    s0: float,
) -> tuple[np.ndarray, np.ndarray]:
    """S-damping and optical-pumping drift matrices ``(A_SD, A_OP)``."""
    base = _s_damping(coeffs, layout)
    pump = np.zeros_like(base)
    scale = s0 / math.sqrt(2 * (2 * layout.I + 1))
    for i, (L, F) in enumerate(layout.slots):
        if not _exists(layout, L, F):
            continue
        for j, (Lp, Fp) in enumerate(layout.slots):
            if abs(Lp - L) == 1 and _exists(layout, Lp, Fp):
                pump[i, j] = scale * coeffs.Zp.get((Lp, F, L), 0.0) * _x_of(coeffs, Lp, Fp, Fp)
    return R_sd * base, R_op * (base + pump)


def drift_magnetic(layout: MultipoleLayout, omega0: float, M: int = 1) -> np.ndarray:
    """Longitudinal-field drift ``i M omega0 diag(+-1)`` (``+`` on ``a`` slots)."""
    return np.diag(1j * M * omega0 * layout.manifold_sign())


def drive_vector(state: SpinTempState, layout: MultipoleLayout) -> np.ndarray:
    """Transverse drive vector: ``+-sqrt(L(L+1)/2) <T_L0(FF)>_ST`` per slot."""
    out = np.zeros(layout.dim)
    sign = layout.manifold_sign()
    for k, (L, F) in enumerate(layout.slots):
        if _exists(layout, L, F):
            out[k] = sign[k] * math.sqrt(L * (L + 1) / 2) * state.multipole(L, F)
    return out


def assemble_system(
    state: SpinTempState,
    rates: RateSet,
    omega0: float,
    layout: MultipoleLayout | None = None,
    coeffs: CouplingCoeffs | None = None,
) -> DriftSystem:
    """Total drift ``A_1 = A_MG + A_SE + A_SD + A_OP`` and the drive vector.

    Parameters
    ----------
    state : SpinTempState
    rates : RateSet
    omega0 : float
        Manifold Larmor frequency ``gamma_F B_z`` in rad/s.
    layout, coeffs : optional
        Defaults to the physical ``M = 1`` layout and the closed-form
        coefficients for ``state.I``.

    Warns
    -----
    StabilityWarning
        If any eigenvalue of ``A_1`` has a non-negative real part.
    """
    layout = layout or multipole_layout(state.I, 1)
    coeffs = coeffs or ht_coefficients(state.I)
    relax = drift_spin_exchange(state, coeffs, layout, rates.R_se)
    sd, op = drift_relaxation_pumping(coeffs, layout, rates.R_sd, rates.R_op, rates.s0)
    relax = relax + sd + op
    A1 = relax + drift_magnetic(layout, omega0, 1)
    Am1 = relax + drift_magnetic(layout, omega0, -1)
    n = layout.dim
    Acomb = np.zeros((2 * n, 2 * n), dtype=complex)
    Acomb[:n, :n] = A1
    Acomb[n:, n:] = Am1
    live = [k for k, (L, F) in enumerate(layout.slots) if _exists(layout, L, F)]
    ev = np.linalg.eigvals(A1[np.ix_(live, live)])
    stable = bool(np.all(ev.real < 0))
    if not stable:
        warnings.warn(
            f"drift matrix not strictly stable: max Re(lambda) = {ev.real.max():.3e} s^-1",
            StabilityWarning,
            stacklevel=2,
        )
    return DriftSystem(
        layout=layout,
        A_M={1: A1, -1: Am1},
        A_combined=Acomb,
        B_drive=drive_vector(state, layout),
        omega0=float(omega0),
        stable=stable,
    )
