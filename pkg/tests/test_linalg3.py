import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cosserat_shell import linalg3 as la
from cosserat_shell.errors import Degenerate, NotSkew

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
mat3 = arrays(np.float64, (3, 3), elements=finite)
vec3 = arrays(np.float64, (3,), elements=finite)


@given(vec3)
def test_axl_inverts_anti(v):
    assert np.allclose(la.axl(la.anti(v)), v, atol=0)


@given(vec3, vec3)
def test_anti_is_cross_product(a, b):
    assert np.allclose(la.anti(a) @ b, np.cross(a, b), atol=1e-12)


def test_axl_rejects_symmetric_part():
    with pytest.raises(NotSkew):
        la.axl(np.eye(3))


@given(mat3)
def test_cartan_parts_sum_and_are_orthogonal(X):
    d, s, sph = la.cartan_decompose(X)
    assert np.allclose(d + s + sph, X, atol=1e-12)
    assert abs(la.tr(d)) < 1e-12
    assert abs(la.inner(d, s)) < 1e-10 and abs(la.inner(d, sph)) < 1e-10


@given(mat3)
def test_cofactor_matches_determinant_formula(X):
    det = np.linalg.det(X)
    if abs(det) > 1e-6:
        assert np.allclose(la.cofactor(X), det * np.linalg.inv(X).T, atol=1e-8 * max(1, np.abs(X).max()) ** 2)


def test_cofactor_of_singular_matrix():
    X = np.diag([2.0, 3.0, 0.0])
    assert np.allclose(la.cofactor(X), np.diag([0.0, 0.0, 6.0]))


@given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
def test_polar_decomposition(P):
    F = np.eye(3) + 0.5 * P
    if np.linalg.det(F) < 1e-3:
        return
    R, U = la.polar_decompose(F)
    assert np.allclose(R @ U, F, atol=1e-12)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) > 0
    assert np.allclose(U, U.T, atol=1e-14)
    assert np.all(np.linalg.eigvalsh(U) > 0)


def test_polar_rejects_reflection():
    with pytest.raises(Degenerate):
        la.polar_decompose(np.diag([1.0, 1.0, -1.0]))


def test_polar_of_rotation_is_itself():
    c, s = np.cos(0.3), np.sin(0.3)
    R0 = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    R, U = la.polar_decompose(R0)
    assert np.allclose(R, R0, atol=1e-15) and np.allclose(U, np.eye(3), atol=1e-15)


def test_flat_lift_and_j2():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    L = la.flat_lift(M)
    assert np.array_equal(L[:2, :2], M) and not L[2].any() and not L[:, 2].any()
    assert np.allclose(la.J2 @ la.J2, -np.diag([1.0, 1.0, 0.0]))


def test_stacked_inputs():
    X = np.random.default_rng(0).standard_normal((4, 5, 3, 3))
    assert la.tr(X).shape == (4, 5)
    assert np.allclose(la.sym(X) + la.skew(X), X)
    assert np.allclose(la.axl_unchecked(la.anti(np.ones((2, 3)))), np.ones((2, 3)))
