import numpy as np
import pytest

from slitstrip.clifford import (CliffordElement, FermionAlgebra, induced_rotation_by_conjugation,
                                induced_rotation_table, mode_of_function, real_form_defect,
                                real_inner, reflect, rotation_on_functions,
                                verify_fermion_field_extension)
from slitstrip.discrete_cx import eigenfunction_basis
from slitstrip.geometry import Strip


def _dense_generators(w):
    alg = FermionAlgebra(Strip(-1, w - 1))
    psi = [alg.dense(CliffordElement.generator(w, "psi", j)) for j in range(w)]
    psis = [alg.dense(CliffordElement.generator(w, "psi*", j)) for j in range(w)]
    return alg, psi, psis


def test_psi_squares_to_minus_one():
    _, psi, psis = _dense_generators(2)
    for p, q in zip(psi, psis):
        assert np.allclose(p @ p, -np.eye(4), atol=1e-15)
        assert np.allclose(q @ q, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("w", [2, 3])
def test_adjoints(w):
    _, psi, psis = _dense_generators(w)
    for p, q in zip(psi, psis):
        assert np.allclose(p.conj().T, -p, atol=1e-15)
        assert np.allclose(q.conj().T, q, atol=1e-15)


def test_mixed_generators_anticommute():
    _, psi, psis = _dense_generators(3)
    for p in psi:
        for q in psis:
            assert np.abs(p @ q + q @ p).max() < 1e-14


def test_anticommutator_formula_matches_matrices():
    w = 3
    alg = FermionAlgebra(Strip(-1, 2))
    rng = np.random.default_rng(0)
    a = CliffordElement(*(rng.standard_normal((2, w)) + 1j * rng.standard_normal((2, w))))
    b = CliffordElement(*(rng.standard_normal((2, w)) + 1j * rng.standard_normal((2, w))))
    ma, mb = alg.dense(a), alg.dense(b)
    assert np.allclose(ma @ mb + mb @ ma, a.anticommutator(b) * np.eye(8), atol=1e-12)
    assert np.allclose(alg.dense(a.adjoint()), ma.conj().T, atol=1e-14)


def test_modes_of_paired_eigenfunctions_form_creation_annihilation_pairs():
    w = 3
    basis = eigenfunction_basis(w)
    for k in basis.modes:
        plus, minus = mode_of_function(basis.f(k)), mode_of_function(basis.f(-k))
        assert abs(plus.anticommutator(plus)) < 1e-12
        assert abs(plus.anticommutator(minus) - 1) < 1e-12


def test_mode_adjoint_is_mode_of_reflection():
    alg = FermionAlgebra(Strip(-1, 1))
    f = np.array([0.3 + 1.1j, -0.7 + 0.2j])
    lhs = alg.dense(mode_of_function(f)).conj().T
    assert np.allclose(lhs, alg.dense(mode_of_function(reflect(f))), atol=1e-14)


def test_reflection_is_an_isometric_involution():
    rng = np.random.default_rng(3)
    f, g = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    assert np.allclose(reflect(reflect(f)), f)
    assert real_inner(reflect(f), reflect(g)) == pytest.approx(real_inner(f, g))


@pytest.mark.parametrize("w", [1, 2, 3, 4])
def test_rotation_table_matches_conjugation(w):
    s = Strip(-(w // 2), w - w // 2)
    assert np.abs(induced_rotation_table(w) - induced_rotation_by_conjugation(s)).max() < 1e-12


@pytest.mark.parametrize("w", [2, 5])
def test_rotation_spectrum_comes_in_reciprocal_pairs(w):
    vals = np.sort(np.linalg.eigvals(rotation_on_functions(w)).real)
    assert np.allclose(vals * vals[::-1], 1, atol=1e-10)
    assert real_form_defect(w) < 1e-12


@pytest.mark.parametrize("w", [2, 3])
def test_fermion_field_identities(w):
    rep = verify_fermion_field_extension(Strip(-1, w - 1))
    assert rep.crbv < 1e-12
    assert rep.closedness < 1e-12
    assert rep.worst() < 1e-11
