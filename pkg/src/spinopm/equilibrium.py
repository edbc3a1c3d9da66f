"""
Spin-temperature steady state and its equal-time statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .angular import clebsch_gordan
from .operators import MultipoleLayout, hilbert_basis

__all__ = [
    "partition",
    "mean_spin_z",
    "SpinTempState",
    "solve_beta",
    "st_multipole",
    "transverse_variances",
    "CovarianceBlock",
    "equal_time_covariance",
]


def partition(K: float, beta: float) -> float:
    """``Z(K, beta) = sinh[beta (K + 1/2)] / sinh[beta / 2]``."""
    if beta == 0:
        return 2 * K + 1
    return math.sinh(beta * (K + 0.5)) / math.sinh(beta / 2)


def mean_spin_z(K: float, beta):
    """Mean ``<K_z>`` of a spin-K in the spin-temperature state ``e^{beta K_z}/Z``.

    Accepts complex ``beta`` (used for complex-step derivatives).
    """
    m = np.arange(-K, K + 0.5)
    w = np.exp(beta * (m - (K if np.real(beta) >= 0 else -K)))
    return np.sum(m * w) / np.sum(w)


@dataclass(frozen=True)
class SpinTempState:
    """Spin-temperature equilibrium ``rho ~ exp(beta F_z)``.

    ``st_multipoles[(L, F)]`` holds ``<T_L0(FF)>``; all ``M != 0`` moments
    vanish by rotational symmetry about z.
    """

    beta: float
    p: float
    I: float
    rho0: np.ndarray = field(repr=False)
    st_multipoles: dict = field(repr=False)

    def multipole(self, L: int, F: float) -> float:
        return self.st_multipoles.get((L, float(F)), 0.0)


def st_multipole(L: int, F: float, I: float, beta: float) -> float:
    """``<T_L0(FF)>`` in the spin-temperature state from the explicit CG sum."""
    Z = partition(0.5, beta) * partition(I, beta)
    total = 0.0
    for k in range(int(round(2 * I + 1))):
        mi = I - k
        for ms in (0.5, -0.5):
            m = mi + ms
            if abs(m) > F + 1e-9:
                continue
            c = clebsch_gordan(I, mi, 0.5, ms, F, m)
            if c == 0.0:
                continue
            total += (
                math.exp(beta * m) / Z * c * c
                * clebsch_gordan(F, m, F, -m, L, 0) * (-1) ** round(m - F)
            )
    return total


def _build_state(beta: float, p: float, I: float) -> SpinTempState:
    basis = hilbert_basis(I)
    m = np.array([mm for _, mm in basis.coupled])
    w = np.exp(beta * (m - m.max()))
    rho0 = np.diag(w / w.sum()).astype(complex)
    rho0.setflags(write=False)
    mult = {}
    for F in (I + 0.5, I - 0.5):
        for L in range(0, int(round(2 * F)) + 1):
            mult[(L, F)] = st_multipole(L, F, I, beta)
    return SpinTempState(beta=beta, p=p, I=float(I), rho0=rho0, st_multipoles=mult)


def solve_beta(p: float, I: float) -> SpinTempState:
    """Spin-temperature state with electron polarization ``p = 2<S_z>``.

    Raises
    ------
    ValueError
        For ``p < 0`` (invalid argument) or ``p >= 1`` (beta diverges).
    """
    if p < 0:
        raise ValueError(f"polarization must be non-negative, got {p}")
    if p >= 1:
        raise ValueError(f"polarization {p} >= 1: spin temperature diverges")
    # 2<S_z> = tanh(beta / 2) for the electron in e^{beta F_z}
    return _build_state(2.0 * math.atanh(p), float(p), I)


# --------------------------------------------------------------------------
# closed-form transverse variances
# --------------------------------------------------------------------------

def _binom_poly(n: int, sign: int) -> list[Fraction]:
    # coefficients (ascending) of (p + sign)^n
    return [Fraction(math.comb(n, k) * sign ** (n - k)) for k in range(n + 1)]


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)]


def _pscale(a, s):
    return [s * x for x in a]


def _cancel(num, den):
    while num and den and num[0] == 0 and den[0] == 0:
        num, den = num[1:], den[1:]
    return num, den


@lru_cache(maxsize=None)
def _variance_polys(twoI: int):
    I2 = Fraction(twoI)  # 2I
    n = twoI + 1
    den = _pscale(_padd(_binom_poly(n, -1), _pscale(_binom_poly(n, 1), -1)), 8)
    den = [Fraction(0), Fraction(0)] + den  # 8 p^2 [...]
    # a manifold
    k = I2 + 2  # 2(I+1)
    na = _padd(
        _pmul([Fraction(1), k], _binom_poly(n + 1, -1)),
        _pmul(_binom_poly(n + 1, 1), [Fraction(1), -k]),
    )
    # b manifold
    inner = _padd(
        _pmul(_binom_poly(twoI, 1), [Fraction(-1), I2]),
        _pscale(_pmul(_binom_poly(twoI, -1), [Fraction(1), I2]), -1),
    )
    nb = _pmul([Fraction(-1), Fraction(0), Fraction(1)], inner)
    pa = _cancel(na, den)
    pb = _cancel(nb, den)
    to_f = lambda c: np.array([float(x) for x in c])  # noqa: E731
    return (to_f(pa[0]), to_f(pa[1])), (to_f(pb[0]), to_f(pb[1]))


def transverse_variances(p, I: float):
    """Closed-form ``(Var[F_{a,x}], Var[F_{b,x}])`` in the spin-temperature state.

    The rational functions are reduced exactly (common powers of ``p``
    cancelled in integer arithmetic) so ``p -> 0`` needs no special casing.
    Works elementwise on arrays; ``0 <= p <= 1``.
    """
    (na, da), (nb, db) = _variance_polys(int(round(2 * I)))
    pv = np.polynomial.polynomial.polyval
    p = np.asarray(p, dtype=float)
    va = pv(p, na) / pv(p, da)
    vb = pv(p, nb) / pv(p, db)
    if va.ndim == 0:
        return float(va), float(vb)
    return va, vb


# --------------------------------------------------------------------------
# equal-time covariance of the |M| = 1 multipoles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceBlock:
    """``Sigma[i, j] = <{T_{i,+1}, T_{j,-1}}>/2`` and ``R0 = [[0, Sigma], [Sigma^T, 0]]``."""

    Sigma: np.ndarray
    R0: np.ndarray


def _product_mean(L: int, Lp: int, F: float, I: float, beta: float, order: int) -> float:
    # order=+1: <T_{L,1}(FF) T_{L',-1}(FF)>, order=-1: <T_{L',-1}(FF) T_{L,1}(FF)>
    Z = partition(0.5, beta) * partition(I, beta)
    total = 0.0
    for k in range(int(round(2 * I + 1))):
        mi = I - k
        for ms in (0.5, -0.5):
            c = clebsch_gordan(I, mi, 0.5, ms, F, mi + ms) if abs(mi + ms) <= F else 0.0
            if c == 0.0:
                continue
            m = mi + ms  # populated sub-level |F m>
            if order > 0:
                # |F m> <F m|: T_{L1} row m, T_{L'-1} row m-1
                if abs(m - 1) > F + 1e-9:
                    continue
                cc = clebsch_gordan(F, m, F, 1 - m, L, 1) * clebsch_gordan(F, m - 1, F, -m, Lp, -1)
            else:
                if abs(m + 1) > F + 1e-9:
                    continue
                cc = clebsch_gordan(F, m, F, -1 - m, Lp, -1) * clebsch_gordan(F, m + 1, F, -m, L, 1)
            total -= c * c * math.exp(beta * m) / Z * cc
    return total


def equal_time_covariance(state: SpinTempState, layout: MultipoleLayout) -> CovarianceBlock:
    """Symmetrized equal-time covariance of the ``M = +-1`` multipole vectors."""
    n = layout.dim
    Sigma = np.zeros((n, n))
    phantom = set(layout.phantom)
    for i, (L, F) in enumerate(layout.slots):
        for j, (Lp, Fp) in enumerate(layout.slots):
            if abs(F - Fp) > 1e-9 or (L, F) in phantom or (Lp, Fp) in phantom:
                continue
            Sigma[i, j] = 0.5 * (
                _product_mean(L, Lp, F, state.I, state.beta, +1)
                + _product_mean(L, Lp, F, state.I, state.beta, -1)
            )
    R0 = np.zeros((2 * n, 2 * n))
    R0[:n, n:] = Sigma
    R0[n:, :n] = Sigma.T
    return CovarianceBlock(Sigma=Sigma, R0=R0)
