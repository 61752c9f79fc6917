import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procal.dataset import Record
from procal.errors import DimensionMismatch
from procal.seeding import derive_rng
from procal.spectral import (RotationMatrix, apply_rotation, covariance_from_stats, eigendecompose,
                             group_covariance, random_orthogonal, shuffle_columns)
from procal.dataset import column_stats

from oracles import char_poly_eigenvalues, symmetric_integer_matrices


def orth_err(r):
    n = r.shape[0]
    return max(np.max(np.abs(r @ r.T - np.eye(n))), np.max(np.abs(r.T @ r - np.eye(n))))


def check_eigensystem(c, e, tol=1e-8):
    p, lam = e.eigenvectors, e.eigenvalues
    assert np.all(np.diff(lam) <= 0)
    assert orth_err(p) <= tol
    scale = max(1.0, np.max(np.abs(c).sum(axis=1)))
    assert np.max(np.abs(p @ np.diag(lam) @ p.T - c)) <= tol * scale
    for j in range(len(lam)):
        assert np.max(np.abs(c @ p[:, j] - lam[j] * p[:, j])) <= tol * max(1.0, abs(lam[j]))


def test_covariance_hand_example():
    s, ps = column_stats(np.array([[0.0, 0.0], [2.0, 2.0]]))
    c = covariance_from_stats(s, ps, 2)
    np.testing.assert_array_equal(c.entries, [[1, 1], [1, 1]])


def test_covariance_singleton_and_constant():
    assert group_covariance(np.array([[3.0, 4.0]])).is_zero()
    assert group_covariance(np.full((5, 3), 2.5)).is_zero()


def test_covariance_matches_population_formula():
    x = derive_rng(0, "t").standard_normal((50, 4))
    np.testing.assert_allclose(group_covariance(x).entries, np.cov(x.T, bias=True), atol=1e-12)


def test_eig_ones():
    e = eigendecompose(np.array([[1.0, 1.0], [1.0, 1.0]]))
    np.testing.assert_allclose(e.eigenvalues, [2, 0], atol=1e-12)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(e.eigenvectors, [[r, r], [r, -r]], atol=1e-12)


def test_eig_identity_and_diagonal():
    e = eigendecompose(np.eye(4))
    np.testing.assert_allclose(e.eigenvalues, 1.0)
    assert orth_err(e.eigenvectors) <= 1e-12
    e = eigendecompose(np.diag([1.0, 3.0, 2.0]))
    np.testing.assert_array_equal(e.eigenvalues, [3, 2, 1])
    np.testing.assert_array_equal(np.abs(e.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_eig_zero_matrix_gives_identity():
    e = eigendecompose(np.zeros((3, 3)))
    np.testing.assert_array_equal(e.eigenvectors, np.eye(3))


def test_eig_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        eigendecompose(np.zeros((2, 3)))


def test_sign_convention():
    e = eigendecompose(np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]))
    for j in range(3):
        col = e.eigenvectors[:, j]
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert first > 0


@pytest.mark.parametrize("n", [2, 3])
def test_char_poly_oracle_exhaustive(n):
    for a in symmetric_integer_matrices(n):
        e = eigendecompose(a)
        assert np.max(np.abs(e.eigenvalues - char_poly_eigenvalues(a))) <= 1e-8
        assert np.max(np.abs(e.eigenvectors @ np.diag(e.eigenvalues) @ e.eigenvectors.T - a)) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**31))
def test_random_psd_reconstruction(n, seed):
    rng = derive_rng(seed, "psd")
    b = rng.standard_normal((n, n))
    c = b @ b.T
    check_eigensystem(c, eigendecompose(c))


def test_degenerate_spectrum():
    q = random_orthogonal(6, derive_rng(1, "q"))
    c = q @ np.diag([5.0, 5.0, 5.0, 1.0, 1.0, 0.0]) @ q.T
    c = (c + c.T) / 2
    check_eigensystem(c, eigendecompose(c))


def test_shuffle_identity_permutation():
    e = eigendecompose(np.diag([3.0, 2.0, 1.0]))
    r = shuffle_columns(e, None, permutation=[0, 1, 2])
    np.testing.assert_array_equal(r.entries, e.eigenvectors)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_all_permutations_orthogonal(n):
    rng = derive_rng(n, "perm")
    b = rng.standard_normal((n, n))
    e = eigendecompose(b @ b.T)
    for perm in itertools.permutations(range(n)):
        r = shuffle_columns(e, None, permutation=perm)
        assert orth_err(r.entries) <= 1e-8
        assert list(r.source_shuffle) == list(perm)
        pm = shuffle_columns(eigendecompose(np.eye(n)), None, permutation=perm).entries
        assert set(np.abs(pm).sum(axis=0)) == {1.0}


def test_random_shuffles_8x8():
    b = derive_rng(3, "x").standard_normal((8, 8))
    e = eigendecompose(b @ b.T)
    for s in range(10):
        assert orth_err(shuffle_columns(e, s).entries) <= 1e-8


def test_shuffle_deterministic():
    b = derive_rng(5, "x").standard_normal((5, 5))
    e = eigendecompose(b @ b.T)
    assert np.array_equal(shuffle_columns(e, 11).entries, shuffle_columns(e, 11).entries)


def test_apply_rotation_examples():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(apply_rotation(swap, np.array([[3.0, 4.0]])), [[4.0, 3.0]])
    recs = [Record(np.array([3.0, 4.0]), "A")]
    out = apply_rotation(RotationMatrix(swap, np.array([1, 0])), recs)
    assert out[0].label == "A"
    np.testing.assert_array_equal(out[0].values, [4.0, 3.0])
    x = np.array([[1.0, 2.0], [5.0, -1.0]])
    np.testing.assert_array_equal(apply_rotation(np.eye(2), x), x)
    with pytest.raises(DimensionMismatch):
        apply_rotation(swap, np.zeros((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31))
def test_isometry(n, seed):
    rng = derive_rng(seed, "iso")
    r = random_orthogonal(n, rng)
    x, y = rng.standard_normal((2, n)) * 10
    rx, ry = apply_rotation(r, np.vstack([x, y]))
    assert abs(np.linalg.norm(rx - ry) - np.linalg.norm(x - y)) <= 1e-9 * max(1.0, np.linalg.norm(x - y))
