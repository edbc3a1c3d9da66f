"""
Explicit operator matrices for a single alkali ground state.

The Hilbert space is ``I (x) S`` with ``S = 1/2``. Two orderings are used:

* uncoupled: ``|m_I, m_S>`` in ``np.kron`` order, projections descending;
* coupled: ``|F m>`` with the ``a = I + 1/2`` manifold first, then ``b``,
  projections descending inside each manifold.

Unless stated otherwise every matrix returned here is in the coupled basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angular import clebsch_gordan, twice

__all__ = [
    "spin_matrices",
    "single_tensor",
    "HilbertBasis",
    "hilbert_basis",
    "tensor_matrix",
    "electron_spin",
    "nuclear_spin",
    "manifold_spin",
    "ht_coefficients_matrix",
    "MultipoleLayout",
    "multipole_layout",
    "cartesian_projection",
]


def _ms(j: float) -> np.ndarray:
    return np.arange(twice(j), -twice(j) - 1, -2) / 2.0


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(jx, jy, jz)`` for spin ``j`` in the descending-m basis."""
    m = _ms(j)
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, np.diag(m).astype(complex)


def single_tensor(L: int, M: int, K: float) -> np.ndarray:
    """``T_LM(KK)`` acting on a single spin ``K``."""
    m = _ms(K)
    out = np.zeros((len(m), len(m)))
    for r, mr in enumerate(m):
        c = mr - M
        if abs(c) > K + 1e-9:
            continue
        col = int(round(K - c))
        out[r, col] = (-1) ** round(mr - M - K) * clebsch_gordan(K, mr, K, M - mr, L, M)
    return out


@dataclass(frozen=True)
class HilbertBasis:
    """Labels and the coupled <- uncoupled unitary for nuclear spin ``I``."""

    I: float
    dim: int
    coupled: list = field(repr=False)      # [(F, m), ...]
    uncoupled: list = field(repr=False)    # [(m_I, m_S), ...]
    U: np.ndarray = field(repr=False)      # U[coupled, uncoupled] = C^{Fm}_{I mI; S mS}

    @property
    def a(self) -> float:
        return self.I + 0.5

    @property
    def b(self) -> float:
        return self.I - 0.5

    def manifold_slice(self, F: float) -> slice:
        na = int(round(2 * self.a + 1))
        return slice(0, na) if abs(F - self.a) < 1e-9 else slice(na, self.dim)

    def projector(self, F: float) -> np.ndarray:
        P = np.zeros((self.dim, self.dim))
        s = self.manifold_slice(F)
        P[s, s] = np.eye(s.stop - s.start)
        return P

    def to_coupled(self, op: np.ndarray) -> np.ndarray:
        return self.U @ op @ self.U.T

    def to_uncoupled(self, op: np.ndarray) -> np.ndarray:
        return self.U.T @ op @ self.U


@lru_cache(maxsize=None)
def hilbert_basis(I: float) -> HilbertBasis:
    I = float(I)
    unc = [(mi, ms) for mi in _ms(I) for ms in (0.5, -0.5)]
    cpl = [(F, m) for F in (I + 0.5, I - 0.5) if F >= 0 for m in _ms(F)]
    U = np.zeros((len(cpl), len(unc)))
    for r, (F, m) in enumerate(cpl):
        for c, (mi, ms) in enumerate(unc):
            if abs(mi + ms - m) < 1e-9:
                U[r, c] = clebsch_gordan(I, mi, 0.5, ms, F, m)
    U.setflags(write=False)
    return HilbertBasis(I=I, dim=len(cpl), coupled=cpl, uncoupled=unc, U=U)


def tensor_matrix(L: int, M: int, F: float, Fp: float, I: float) -> np.ndarray:
    r"""Spherical tensor ``T_LM(FF')`` in the coupled basis.

    .. math:: T_{LM}(FF') = \sum_m |Fm\rangle\langle F', m-M| (-1)^{m-M-F'} C^{LM}_{Fm;F',M-m}

    Raises
    ------
    ValueError
        If ``(L, F, F')`` violates the triangle rule or ``|M| > L``.
    """
    if not (abs(F - Fp) <= L <= F + Fp) or abs(M) > L:
        raise ValueError(f"T_{L}{M}({F},{Fp}) is not defined")
    basis = hilbert_basis(I)
    idx = {lab: k for k, lab in enumerate((round(2 * f), round(2 * m)) for f, m in basis.coupled)}
    out = np.zeros((basis.dim, basis.dim))
    for m in _ms(F):
        mp = m - M
        if abs(mp) > Fp + 1e-9:
            continue
        r = idx[(round(2 * F), round(2 * m))]
        c = idx[(round(2 * Fp), round(2 * mp))]
        out[r, c] = (-1) ** round(m - M - Fp) * clebsch_gordan(F, m, Fp, M - m, L, M)
    return out


def _uncoupled_embed(I: float, op_nuc: np.ndarray | None, op_el: np.ndarray | None) -> np.ndarray:
    ni = int(round(2 * I + 1))
    a = np.eye(ni) if op_nuc is None else op_nuc
    b = np.eye(2) if op_el is None else op_el
    return np.kron(a, b)


@lru_cache(maxsize=None)
def electron_spin(I: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Electron spin ``(Sx, Sy, Sz)`` on the full space, coupled basis."""
    basis = hilbert_basis(I)
    return tuple(basis.to_coupled(_uncoupled_embed(I, None, s)) for s in spin_matrices(0.5))


@lru_cache(maxsize=None)
def nuclear_spin(I: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nuclear spin ``(Ix, Iy, Iz)`` on the full space, coupled basis."""
    basis = hilbert_basis(I)
    return tuple(basis.to_coupled(_uncoupled_embed(I, s, None)) for s in spin_matrices(I))


@lru_cache(maxsize=None)
def manifold_spin(I: float, F: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Total spin restricted to manifold ``F``: ``P_F F_k P_F`` for k = x, y, z."""
    basis = hilbert_basis(I)
    P = basis.projector(F)
    S = electron_spin(I)
    N = nuclear_spin(I)
    return tuple(P @ (s + n) @ P for s, n in zip(S, N))


def ht_coefficients_matrix(I: float) -> dict:
    """X_L(FF') and Y_L(FF') from explicit Hilbert-Schmidt overlaps.

    Independent of the 9j route in :func:`spinopm.angular.ht_coefficients`;
    returns ``{"X": {...}, "Y": {...}}`` keyed like :class:`CouplingCoeffs`.
    """
    I = float(I)
    basis = hilbert_basis(I)
    manifolds = [F for F in (I + 0.5, I - 0.5) if F >= 0]
    t00_s = single_tensor(0, 0, 0.5)
    X, Y = {}, {}
    for L in range(0, int(2 * I + 2)):
        if L <= 2 * I:
            nuc = basis.to_coupled(_uncoupled_embed(I, single_tensor(L, 0, I), t00_s))
        else:
            nuc = np.zeros((basis.dim, basis.dim))
        for F in manifolds:
            for Fp in manifolds:
                if abs(F - Fp) <= L <= F + Fp:
                    X[(L, F, Fp)] = float(np.trace(tensor_matrix(L, 0, F, Fp, I).T @ nuc))
                else:
                    X[(L, F, Fp)] = 0.0
    for L in (0, 1):
        el = basis.to_coupled(_uncoupled_embed(I, single_tensor(0, 0, I), single_tensor(L, 0, 0.5)))
        for F in manifolds:
            for Fp in manifolds:
                if abs(F - Fp) <= L <= F + Fp:
                    Y[(L, F, Fp)] = float(np.trace(tensor_matrix(L, 0, F, Fp, I).T @ el))
                else:
                    Y[(L, F, Fp)] = 0.0
    return {"X": X, "Y": Y}


# --------------------------------------------------------------------------
# Multipole state-vector layout and the spherical -> Cartesian map
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MultipoleLayout:
    """Ordered ``(L, F)`` slots of the Zeeman-multipole vector for one ``M``.

    ``kind="physical"`` keeps every tensor that exists (aa up to ``L = 2I+1``,
    bb up to ``L = 2I-1``). ``kind="padded"`` pairs aa/bb for ``L = 1..2I``,
    which drops ``T_{2I+1}(aa)`` and carries a slot ``T_{2I}(bb)`` that has
    no operator behind it (``phantom``).
    """

    I: float
    M: int
    slots: tuple
    kind: str = "physical"
    phantom: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.slots)

    def index(self, L: int, F: float) -> int:
        for k, (l, f) in enumerate(self.slots):
            if l == L and abs(f - F) < 1e-9:
                return k
        raise KeyError((L, F))

    def manifold_sign(self) -> np.ndarray:
        """+1 for ``a`` slots, -1 for ``b`` slots."""
        a = self.I + 0.5
        return np.array([1.0 if abs(F - a) < 1e-9 else -1.0 for _, F in self.slots])


def multipole_layout(I: float, M: int = 1, kind: str = "physical") -> MultipoleLayout:
    I = float(I)
    a, b = I + 0.5, I - 0.5
    lmin = max(1, abs(M))
    slots, phantom = [], []
    if kind == "physical":
        for L in range(lmin, int(round(2 * a)) + 1):
            slots.append((L, a))
            if L <= 2 * b:
                slots.append((L, b))
    elif kind == "padded":
        for L in range(lmin, int(round(2 * I)) + 1):
            slots.append((L, a))
            slots.append((L, b))
            if L > 2 * b:
                phantom.append((L, b))
    else:
        raise ValueError(f"unknown layout kind {kind!r}")
    return MultipoleLayout(I=I, M=M, slots=tuple(slots), kind=kind, phantom=tuple(phantom))


def cartesian_projection(layout: MultipoleLayout) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Mfrak, Mfrak_tilde, Mcal)``.

    ``Mfrak`` is the 2x2 diagonal scale between ``T_{1,+-1}(FF)`` and
    ``F_{+-1}(FF)``; ``Mfrak_tilde`` pads it to act on a whole ``M = 1``
    vector; ``Mcal`` maps ``[T_{+1}, T_{-1}]`` to
    ``[Fx(aa), Fx(bb), Fy(aa), Fy(bb)]``.
    """
    I = layout.I
    Mf = np.diag([
        np.sqrt((I + 1) * (2 * I + 1) * (2 * I + 3)) / (2 * np.sqrt(3)),
        np.sqrt(I * (2 * I - 1) * (2 * I + 1)) / (2 * np.sqrt(3)),
    ])
    n = layout.dim
    Mt = np.zeros((2, n))
    Mt[0, layout.index(1, I + 0.5)] = Mf[0, 0]
    Mt[1, layout.index(1, I - 0.5)] = Mf[1, 1]
    Mcal = np.zeros((4, 2 * n), dtype=complex)
    Mcal[0:2, :n] = -Mt
    Mcal[0:2, n:] = Mt
    Mcal[2:4, :n] = 1j * Mt
    Mcal[2:4, n:] = 1j * Mt
    return Mf, Mt, Mcal
