import itertools

import numpy as np
import pytest

from spinopm.operators import (
    cartesian_projection,
    electron_spin,
    hilbert_basis,
    manifold_spin,
    multipole_layout,
    nuclear_spin,
    tensor_matrix,
)

from conftest import random_density_matrix


def _all_tensors(I):
    out = []
    for F, Fp in itertools.product((I + 0.5, I - 0.5), repeat=2):
        for L in range(int(abs(F - Fp)), int(F + Fp) + 1):
            for M in range(-L, L + 1):
                out.append(((L, M, F, Fp), tensor_matrix(L, M, F, Fp, I)))
    return out


@pytest.mark.parametrize("I", [1.5, 2.5, 3.5])
def test_tensor_orthonormality(I):
    ops = _all_tensors(I)
    mats = np.array([m for _, m in ops])
    gram = np.einsum("aij,bij->ab", mats.conj(), mats)
    assert len(ops) == (2 * (2 * I + 1)) ** 2
    assert np.max(np.abs(gram - np.eye(len(ops)))) < 1e-12


def test_tensor_hermitian_conjugate_phase():
    I = 1.5
    for L in (1, 2, 3):
        for M in range(-L, L + 1):
            T = tensor_matrix(L, M, 2.0, 2.0, I)
            assert np.allclose(T.conj().T, (-1) ** M * tensor_matrix(L, -M, 2.0, 2.0, I), atol=1e-14)


def test_spin_operators_commutation():
    I = 1.5
    for ops in (electron_spin(I), nuclear_spin(I)):
        x, y, z = ops
        assert np.allclose(x @ y - y @ x, 1j * z, atol=1e-13)


def test_manifold_spin_is_total_spin_in_block():
    I = 1.5
    basis = hilbert_basis(I)
    for F in (2.0, 1.0):
        fx, fy, fz = manifold_spin(I, F)
        f2 = fx @ fx + fy @ fy + fz @ fz
        P = basis.projector(F)
        assert np.allclose(f2, F * (F + 1) * P, atol=1e-12)


def test_layouts():
    phys = multipole_layout(1.5, 1)
    assert phys.slots[0] == (1, 2.0) and (4, 2.0) in phys.slots and (3, 1.0) not in phys.slots
    padded = multipole_layout(1.5, 1, kind="padded")
    assert padded.phantom == ((3, 1.0),)
    assert (4, 2.0) not in padded.slots
    with pytest.raises(ValueError):
        multipole_layout(1.5, 1, kind="other")
    assert list(phys.manifold_sign()) == [1, -1, 1, -1, 1, 1]


@pytest.mark.parametrize("I", [1.5, 2.5])
def test_cartesian_projection_reproduces_spin_means(I, rng):
    lay = multipole_layout(I)
    _, _, Mcal = cartesian_projection(lay)
    rho = random_density_matrix(int(2 * (2 * I + 1)), rng)
    v = np.array([np.trace(tensor_matrix(L, M, F, F, I) @ rho) for M in (1, -1) for L, F in lay.slots])
    expect = [np.trace(manifold_spin(I, F)[k] @ rho) for k in (0, 1) for F in (I + 0.5, I - 0.5)]
    assert np.allclose(Mcal @ v, expect, atol=1e-13)
