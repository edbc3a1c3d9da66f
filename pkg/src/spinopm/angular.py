"""
Angular-momentum algebra with exact rational arithmetic.

All symbols are evaluated as ``s * sqrt(q)`` with ``s`` and ``q`` rational
(:class:`fractions.Fraction`) and converted to float only on return, so sign
information survives cancellations in the Racah sums. Arguments may be given
as ints, floats or Fractions; internally every angular momentum is keyed on
the integer ``2j`` so that half-integers are exact and memoisation is cheap.

Phase convention is Condon-Shortley throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "twice",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
    "wigner_9j",
    "racah_w",
    "CouplingCoeffs",
    "ht_coefficients",
]


def twice(j) -> int:
    """Return ``2j`` as an int, rejecting anything that is not a half-integer."""
    if isinstance(j, int):
        return 2 * j
    v = Fraction(j).limit_denominator(4) if isinstance(j, float) else Fraction(j)
    if isinstance(j, float) and abs(float(v) - j) > 1e-9:
        raise ValueError(f"{j!r} is not a half-integer")
    t = 2 * v
    if t.denominator != 1:
        raise ValueError(f"{j!r} is not a half-integer")
    return int(t)


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _tri(a2: int, b2: int, c2: int) -> bool:
    return (
        a2 >= 0 and b2 >= 0 and c2 >= 0
        and (a2 + b2 + c2) % 2 == 0
        and abs(a2 - b2) <= c2 <= a2 + b2
    )


@lru_cache(maxsize=None)
def _delta_sq(a2: int, b2: int, c2: int) -> Fraction:
    # square of the triangle coefficient; caller guarantees _tri
    return Fraction(
        _fact((a2 + b2 - c2) // 2) * _fact((a2 - b2 + c2) // 2) * _fact((-a2 + b2 + c2) // 2),
        _fact((a2 + b2 + c2) // 2 + 1),
    )


def _to_float(s: Fraction, q: Fraction) -> float:
    if s == 0 or q == 0:
        return 0.0
    mag = math.sqrt(s * s * q) if s * s * q < 1e300 else math.sqrt(float(s * s)) * math.sqrt(float(q))
    return mag if s > 0 else -mag


# --------------------------------------------------------------------------
# Clebsch-Gordan / 3j
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cg_exact(j1: int, m1: int, j2: int, m2: int, J: int, M: int) -> tuple[Fraction, Fraction]:
    """CG coefficient as (rational sum, rational radicand); arguments are 2j."""
    zero = (Fraction(0), Fraction(1))
    if m1 + m2 != M or not _tri(j1, j2, J):
        return zero
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return zero
    if (j1 - m1) % 2 or (j2 - m2) % 2 or (J - M) % 2:
        return zero
    h = lambda x: x // 2  # noqa: E731  (all combinations below are even)
    radicand = Fraction(J + 1) * _delta_sq(j1, j2, J) * (
        _fact(h(J + M)) * _fact(h(J - M)) * _fact(h(j1 - m1)) * _fact(h(j1 + m1))
        * _fact(h(j2 - m2)) * _fact(h(j2 + m2))
    )
    kmin = max(0, h(j2 - J - m1), h(j1 + m2 - J))
    kmax = min(h(j1 + j2 - J), h(j1 - m1), h(j2 + m2))
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            _fact(k) * _fact(h(j1 + j2 - J) - k) * _fact(h(j1 - m1) - k)
            * _fact(h(j2 + m2) - k) * _fact(h(J - j2 + m1) + k) * _fact(h(J - j1 - m2) + k)
        )
        total += Fraction((-1) ** k, den)
    return total, radicand


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    r"""Clebsch-Gordan coefficient :math:`C^{JM}_{j_1 m_1; j_2 m_2}`.

    Returns 0 when the projections do not add up or a triangle rule fails.

    Raises
    ------
    ValueError
        If any ``j - m`` is not an integer or an argument is not a half-integer.
    """
    args = [twice(x) for x in (j1, m1, j2, m2, J, M)]
    for j, m in ((args[0], args[1]), (args[2], args[3]), (args[4], args[5])):
        if (j - m) % 2:
            raise ValueError("j - m must be an integer")
    return _to_float(*_cg_exact(*args))


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol, obtained from the CG coefficient."""
    a = [twice(x) for x in (j1, j2, j3, m1, m2, m3)]
    s, q = _cg_exact(a[0], a[3], a[1], a[4], a[2], -a[5])
    if s == 0:
        return 0.0
    phase = -1 if ((a[0] - a[1] - a[5]) // 2) % 2 else 1
    return _to_float(phase * s, q / (a[2] + 1))


# --------------------------------------------------------------------------
# 6j / Racah W / 9j
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sixj_sum(j1: int, j2: int, j3: int, j4: int, j5: int, j6: int) -> Fraction:
    # Racah sum without the four triangle prefactors; caller checks triangles
    a1 = (j1 + j2 + j3) // 2
    a2 = (j1 + j5 + j6) // 2
    a3 = (j4 + j2 + j6) // 2
    a4 = (j4 + j5 + j3) // 2
    b1 = (j1 + j2 + j4 + j5) // 2
    b2 = (j2 + j3 + j5 + j6) // 2
    b3 = (j3 + j1 + j6 + j4) // 2
    total = Fraction(0)
    for t in range(max(a1, a2, a3, a4), min(b1, b2, b3) + 1):
        den = (
            _fact(t - a1) * _fact(t - a2) * _fact(t - a3) * _fact(t - a4)
            * _fact(b1 - t) * _fact(b2 - t) * _fact(b3 - t)
        )
        total += Fraction((-1) ** t * _fact(t + 1), den)
    return total


def _sixj_ok(j1, j2, j3, j4, j5, j6) -> bool:
    return _tri(j1, j2, j3) and _tri(j1, j5, j6) and _tri(j4, j2, j6) and _tri(j4, j5, j3)


@lru_cache(maxsize=None)
def _sixj_exact(j1, j2, j3, j4, j5, j6) -> tuple[Fraction, Fraction]:
    if not _sixj_ok(j1, j2, j3, j4, j5, j6):
        return Fraction(0), Fraction(1)
    q = _delta_sq(j1, j2, j3) * _delta_sq(j1, j5, j6) * _delta_sq(j4, j2, j6) * _delta_sq(j4, j5, j3)
    return _sixj_sum(j1, j2, j3, j4, j5, j6), q


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol ``{j1 j2 j3; j4 j5 j6}`` (0 on triangle violation)."""
    return _to_float(*_sixj_exact(*(twice(x) for x in (j1, j2, j3, j4, j5, j6))))


def racah_w(a, b, c, d, e, f) -> float:
    """Racah coefficient ``W(abcd; ef) = (-1)^(a+b+c+d) {a b e; d c f}``."""
    t = [twice(x) for x in (a, b, c, d, e, f)]
    s, q = _sixj_exact(t[0], t[1], t[4], t[3], t[2], t[5])
    phase = -1 if ((t[0] + t[1] + t[2] + t[3]) // 2) % 2 else 1
    return _to_float(phase * s, q)


@lru_cache(maxsize=None)
def _ninej_exact(a, b, c, d, e, f, g, h, i) -> tuple[Fraction, Fraction]:
    zero = (Fraction(0), Fraction(1))
    rows_cols = ((a, b, c), (d, e, f), (g, h, i), (a, d, g), (b, e, h), (c, f, i))
    if not all(_tri(*t) for t in rows_cols):
        return zero
    # 9j = sum_x (-1)^{2x} (2x+1) {a b c; f i x} {d e f; b x h} {g h i; x a d}.
    # The x-dependent triangle factors enter squared, the rest factor out.
    common = (
        _delta_sq(a, b, c) * _delta_sq(f, i, c) * _delta_sq(d, e, f)
        * _delta_sq(b, e, h) * _delta_sq(g, h, i) * _delta_sq(g, a, d)
    )
    lo = max(abs(a - i), abs(d - h), abs(b - f))
    hi = min(a + i, d + h, b + f)
    total = Fraction(0)
    for x in range(lo, hi + 1, 2):
        if not (_sixj_ok(a, b, c, f, i, x) and _sixj_ok(d, e, f, b, x, h) and _sixj_ok(g, h, i, x, a, d)):
            continue
        w = _delta_sq(a, i, x) * _delta_sq(f, b, x) * _delta_sq(d, x, h)
        term = (x + 1) * w * _sixj_sum(a, b, c, f, i, x) * _sixj_sum(d, e, f, b, x, h) * _sixj_sum(g, h, i, x, a, d)
        total += -term if x % 2 else term
    return total, common


def wigner_9j(a, b, c, d, e, f, g, h, i) -> float:
    """Wigner 9j symbol with rows ``(a b c), (d e f), (g h i)``."""
    return _to_float(*_ninej_exact(*(twice(x) for x in (a, b, c, d, e, f, g, h, i))))


# --------------------------------------------------------------------------
# Coupled / uncoupled operator overlaps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingCoeffs:
    """Overlaps between the coupled ``T_LM(FF')`` and uncoupled operator bases.

    ``X[(L, F, F')]`` is the overlap with the purely nuclear tensor of rank L,
    ``Y[(L, F, F')]`` (L = 0, 1) the overlap with the purely electronic tensor.
    ``Z`` and ``Zp`` are keyed ``(Lam, F, L)`` and are non-zero only for
    ``Lam = L +- 1``. Manifold labels F are floats (``I +- 1/2``).
    """

    I: float
    X: dict
    Y: dict
    Z: dict
    Zp: dict

    @property
    def a(self) -> float:
        return self.I + 0.5

    @property
    def b(self) -> float:
        return self.I - 0.5


def _mult(j) -> float:
    return 2 * j + 1


@lru_cache(maxsize=None)
def ht_coefficients(I) -> CouplingCoeffs:
    """Closed-form X, Y, Z, Z' coefficients for nuclear spin ``I``.

    Evaluated from the 9j form of the uncoupled-to-coupled transformation;
    :func:`spinopm.operators.ht_coefficients_matrix` computes X and Y from
    explicit Hilbert-Schmidt overlaps instead.
    """
    I = float(I)
    S = 0.5
    manifolds = [I + 0.5] + ([I - 0.5] if I >= 0.5 else [])
    X, Y, Z, Zp = {}, {}, {}, {}
    for F in manifolds:
        for Fp in manifolds:
            for L in range(0, int(2 * I + 2)):
                X[(L, F, Fp)] = (
                    math.sqrt(_mult(L) * _mult(F) * _mult(Fp))
                    * wigner_9j(I, S, F, I, S, Fp, L, 0, L)
                )
            for L in (0, 1):
                Y[(L, F, Fp)] = (
                    math.sqrt(_mult(L) * _mult(F) * _mult(Fp))
                    * wigner_9j(I, S, F, I, S, Fp, 0, L, L)
                )
    # M-independent for |M| = 1 since Lam + 1 - L is even; M = 1 used
    for F in manifolds:
        for L in range(1, int(2 * I + 2)):
            for Lam in (L - 1, L + 1):
                if Lam < 0:
                    continue
                pre = _mult(F) * math.sqrt(6 * _mult(I) * _mult(Lam)) * wigner_9j(I, S, F, I, S, F, Lam, 1, L)
                Z[(Lam, F, L)] = pre * clebsch_gordan(Lam, 0, 1, 1, L, 1)
                Zp[(Lam, F, L)] = pre * clebsch_gordan(Lam, 1, 1, 0, L, 1)
    return CouplingCoeffs(I=I, X=X, Y=Y, Z=Z, Zp=Zp)
