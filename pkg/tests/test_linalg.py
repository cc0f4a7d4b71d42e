"""Storage ingest and matrix-vector product contracts."""

import numpy as np
import pytest
import scipy.sparse as sp

from opins.linalg import as_csr, as_dense, frobenius_norm, matvec


def test_identity_matvec():
    mat = as_csr(np.eye(3))
    np.testing.assert_array_equal(matvec(mat, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_zero_matrix():
    mat = as_csr(np.zeros((4, 4)))
    np.testing.assert_array_equal(matvec(mat, np.ones(4)), np.zeros(4))


@pytest.mark.parametrize("transpose", [False, True])
def test_random_sparse_matches_dense(transpose):
    rng = np.random.default_rng(0)
    dense = rng.standard_normal((10, 10)) * (rng.random((10, 10)) < 0.3)
    mat = as_csr(dense)
    v = rng.standard_normal(10)
    expect = dense.T @ v if transpose else dense @ v
    np.testing.assert_allclose(matvec(mat, v, transpose=transpose), expect, atol=1e-14)


def test_coordinate_ingest_sums_duplicates():
    mat = as_csr((np.array([0, 0, 1]), np.array([1, 1, 0]), np.array([2.0, 3.0, 4.0])),
                 shape=(2, 2))
    assert mat[0, 1] == 5.0
    assert mat.nnz == 2


def test_coordinate_bounds_checked():
    with pytest.raises(ValueError):
        as_csr((np.array([2]), np.array([0]), np.array([1.0])), shape=(2, 2))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        as_csr(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_dimension_mismatch():
    mat = as_csr(np.ones((3, 2)))
    with pytest.raises(ValueError):
        matvec(mat, np.ones(3))
    with pytest.raises(ValueError):
        matvec(mat, np.ones(2), transpose=True)


def test_as_dense_roundtrip():
    rng = np.random.default_rng(1)
    dense = rng.standard_normal((5, 3))
    np.testing.assert_array_equal(as_dense(sp.csr_matrix(dense)), dense)


def test_frobenius_norm_matches_numpy():
    rng = np.random.default_rng(2)
    dense = rng.standard_normal((6, 4))
    assert frobenius_norm(as_csr(dense)) == pytest.approx(np.linalg.norm(dense))
    assert frobenius_norm(as_csr(np.zeros((2, 2)))) == 0.0
