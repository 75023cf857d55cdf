import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_twistor.lorentz import (
    R41, R51, R52, DomainError, Frame, LieElem, MVec, NullDir, SignatureError, basis_coefficients,
    boost_rotation, commutator, fibre_complex_structure, fibre_ident, fibre_point, inner, lie_basis,
    m_minus_basis, m_plus_basis, null_split, random_lorentz, standard_frame,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def unit(i, n=4):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


def test_inner_examples():
    assert inner(MVec(unit(1), R41), MVec(unit(1), R41)) == -1.0
    assert inner(MVec(unit(1) + unit(2), R41), MVec(unit(1) + unit(2), R41)) == 0.0
    assert inner(unit(1, 5), unit(2, 5), R52) == 0.0
    assert inner(unit(2, 5), unit(2, 5), R52) == -1.0


def test_inner_signature_mismatch():
    with pytest.raises(SignatureError):
        inner(MVec(unit(1), R41), MVec(unit(1, 5), R51))
    with pytest.raises(SignatureError):
        inner(unit(1), unit(1))


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=4, max_size=4))
def test_inner_symmetric(u, v):
    assert inner(u, v, R41) == pytest.approx(inner(v, u, R41))


@pytest.mark.parametrize("sig", [R41, R51, R52])
def test_lie_basis_is_skew(sig):
    for i in range(1, sig.dims + 1):
        for j in range(i + 1, sig.dims + 1):
            assert lie_basis(i, j, sig).antisymmetry_residual() < 1e-14


def test_lie_basis_action():
    E34 = lie_basis(3, 4).matrix
    assert np.allclose(E34 @ unit(3), unit(4))
    assert np.allclose(E34 @ unit(4), -unit(3))
    E12 = lie_basis(1, 2).matrix
    assert np.allclose(E12 @ unit(1), -unit(2))


def test_lie_basis_bad_index():
    with pytest.raises(IndexError):
        lie_basis(3, 3)
    with pytest.raises(IndexError):
        lie_basis(0, 2)


def test_m_plus_moves_null_vector_into_screen():
    b1, b2 = m_plus_basis()
    k = unit(1) + unit(2)
    assert np.allclose(b1.matrix @ k, -2 * unit(3))
    assert np.allclose(b2.matrix @ k, -2 * unit(4))
    c1, c2 = m_minus_basis()
    assert np.allclose(c1.matrix @ (unit(1) - unit(2)), -2 * unit(3))


def test_m_plus_is_abelian():
    b1, b2 = m_plus_basis()
    assert np.max(np.abs(commutator(b1, b2).matrix)) < 1e-15


def test_basis_coefficients_round_trip():
    x = 2.0 * lie_basis(1, 3) - 0.5 * lie_basis(2, 4)
    c = basis_coefficients(x)
    assert c[(1, 3)] == pytest.approx(2.0)
    assert c[(2, 4)] == pytest.approx(-0.5)
    assert c[(1, 2)] == 0.0


@given(finite, finite)
def test_fibre_structure_squares_to_minus_one(a, b):
    b1, b2 = m_plus_basis()
    x = a * b1 + b * b2
    jj = fibre_complex_structure(fibre_complex_structure(x))
    assert np.allclose(jj.matrix, -x.matrix, atol=1e-9)


def test_fibre_structure_outside_domain():
    with pytest.raises(DomainError):
        fibre_complex_structure(lie_basis(3, 4))


def test_null_split_standard():
    plus, minus = null_split(standard_frame())
    assert plus == NullDir(unit(1) + unit(2))
    assert minus == NullDir(3 * (unit(1) - unit(2)))
    with pytest.raises(SignatureError):
        null_split(Frame(np.eye(4)[[1, 0, 2, 3]], R41))


@settings(max_examples=50)
@given(st.floats(0, 2 * np.pi), st.floats(0.01, np.pi - 0.01))
def test_fibre_ident_round_trip(phi, theta):
    S = np.array([0.0, np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    T = unit(1)
    k = fibre_ident(S, T)
    assert np.allclose(fibre_point(k, T), S, atol=1e-12)


def test_fibre_ident_requires_unit_vectors():
    with pytest.raises(ValueError):
        fibre_ident(2 * unit(2), unit(1))


def test_null_dir_rejects_non_null():
    with pytest.raises(SignatureError):
        NullDir(unit(2))


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_random_lorentz_preserves_metric(seed):
    L = random_lorentz(np.random.default_rng(seed))
    assert np.allclose(L.T @ R41.eta @ L, R41.eta, atol=1e-12)
    assert L[0, 0] > 0 and np.linalg.det(L) > 0


def test_boost_rotation_preserves_metric():
    L = boost_rotation(0.7, 1.1)
    assert np.allclose(L.T @ R41.eta @ L, R41.eta)
    assert isinstance(lie_basis(1, 2), LieElem)
