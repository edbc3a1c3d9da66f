import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational
from sympy.physics import wigner as sw

from spinopm.angular import (
    clebsch_gordan,
    ht_coefficients,
    racah_w,
    twice,
    wigner_3j,
    wigner_6j,
    wigner_9j,
)
from spinopm.operators import ht_coefficients_matrix

halves = st.integers(min_value=0, max_value=8).map(lambda k: k / 2)


def R(x):
    return Rational(Fraction(x).limit_denominator(2))


def test_twice_rejects_non_half_integers():
    assert twice(1.5) == 3
    with pytest.raises(ValueError):
        twice(0.3)


@pytest.mark.parametrize("j1,j2", [(0.5, 0.5), (1, 0.5), (1.5, 1), (2, 2), (1.5, 2.5)])
def test_cg_exhaustive_small(j1, j2):
    for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
        for m1 in np.arange(-j1, j1 + 1):
            for m2 in np.arange(-j2, j2 + 1):
                M = m1 + m2
                if abs(M) > J:
                    continue
                ref = float(sw.clebsch_gordan(R(j1), R(j2), R(J), R(m1), R(m2), R(M)))
                assert clebsch_gordan(j1, m1, j2, m2, J, M) == pytest.approx(ref, abs=1e-13)


def test_cg_orthonormal_rows():
    j1, j2 = 2.5, 1.5
    Js = np.arange(1, 5)
    for M in np.arange(-1, 2):
        rows = []
        for J in Js:
            rows.append([clebsch_gordan(j1, m1, j2, M - m1, J, M) for m1 in np.arange(-j1, j1 + 1)])
        G = np.array(rows) @ np.array(rows).T
        assert np.allclose(G, np.eye(len(Js)), atol=1e-13)


def test_selection_rules_give_zero():
    assert clebsch_gordan(1, 0, 1, 0, 1, 0) == 0.0
    assert clebsch_gordan(1, 1, 1, 0, 3, 1) == 0.0
    assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0
    assert wigner_9j(1, 1, 3, 1, 1, 1, 1, 1, 1) == 0.0


@settings(max_examples=60, deadline=None)
@given(halves, halves, halves, halves, halves, halves)
def test_6j_matches_sympy(a, b, c, d, e, f):
    triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)]
    if any((x + y + z) % 1 for x, y, z in triads):
        assert wigner_6j(a, b, c, d, e, f) == 0.0
        return
    ref = float(sw.wigner_6j(R(a), R(b), R(c), R(d), R(e), R(f)))
    assert wigner_6j(a, b, c, d, e, f) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(halves, halves, halves, halves, halves, halves)
def test_6j_column_permutation_symmetry(a, b, c, d, e, f):
    v = wigner_6j(a, b, c, d, e, f)
    assert wigner_6j(b, a, c, e, d, f) == pytest.approx(v, abs=1e-13)
    assert wigner_6j(a, e, f, d, b, c) == pytest.approx(v, abs=1e-13)


def test_3j_cg_relation():
    v = wigner_3j(1.5, 1, 2.5, 0.5, -1, 0.5)
    cg = clebsch_gordan(1.5, 0.5, 1, -1, 2.5, -0.5)
    assert v == pytest.approx((-1) ** (1.5 - 1 - 0.5) / np.sqrt(6) * cg, abs=1e-14)


def test_racah_w_phase():
    args = (1.5, 0.5, 1.5, 0.5, 1, 1)
    a, b, c, d, e, f = args
    assert racah_w(*args) == pytest.approx((-1) ** (a + b + c + d) * wigner_6j(a, b, e, d, c, f), abs=1e-14)


def test_9j_hyperfine_arguments_match_sympy():
    for I in (1.5, 2.5):
        for F, Fp in itertools.product((I - 0.5, I + 0.5), repeat=2):
            for L in range(0, int(2 * I + 2)):
                args = (I, 0.5, F, I, 0.5, Fp, L, 0, L)
                ref = float(sw.wigner_9j(*map(R, args), prec=None))
                assert wigner_9j(*args) == pytest.approx(ref, abs=1e-13)


def test_xy_coefficients_dual_path():
    for I in (1.5, 2.5, 3.5):
        closed = ht_coefficients(I)
        direct = ht_coefficients_matrix(I)
        for key, v in direct["X"].items():
            assert closed.X[key] == pytest.approx(v, abs=1e-12)
        for key, v in direct["Y"].items():
            assert closed.Y[key] == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("I", [1.5, 2.5, 3.5])
def test_x_sum_rule(I):
    c = ht_coefficients(I)
    for Lam in range(0, int(2 * I) + 1):
        total = sum(v * v for (L, _, _), v in c.X.items() if L == Lam)
        assert total == pytest.approx(1.0, abs=1e-12)
