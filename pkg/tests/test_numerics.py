import numpy as np
import pytest

from qexpander.expanders.exceptions import NotHermitian, NotPSD
from qexpander.expanders.numerics import (
    closest_unitary,
    hermitian_eig,
    is_projection,
    kron,
    null_space,
    rank_eps,
    subspace_distance,
    unitarity_defect,
    unvec,
    vec,
)


def test_hermitian_eig_sorted_and_orthonormal():
    rng = np.random.default_rng(0)
    G = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    M = G + G.conj().T
    values, vectors = hermitian_eig(M)
    assert np.all(np.diff(values) >= 0)
    assert np.abs(vectors.conj().T @ vectors - np.eye(5)).max() < 1e-12
    assert np.abs(vectors @ np.diag(values) @ vectors.conj().T - M).max() < 1e-10


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rank_eps():
    P = np.diag([1.0, 1.0, 0.0, 1e-12])
    assert rank_eps(P) == 2
    with pytest.raises(NotPSD):
        rank_eps(np.diag([1.0, -1.0]))


def test_is_projection():
    v = np.array([1.0, 1j]) / np.sqrt(2)
    assert is_projection(np.outer(v, v.conj()))
    assert not is_projection(2 * np.eye(2))
    assert not is_projection(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_vec_identity():
    rng = np.random.default_rng(1)
    A, X, B = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.abs(vec(A @ X @ B) - kron(A, B.T) @ vec(X)).max() < 1e-12
    np.testing.assert_allclose(unvec(vec(X), 3), X)


def test_null_space_and_subspace_distance():
    M = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    kernel = null_space(M, 1e-12)
    assert kernel.shape == (3, 1)
    assert subspace_distance(kernel, np.array([[0.0], [0.0], [1.0]])) < 1e-12
    assert subspace_distance(kernel, np.eye(3)[:, :2]) == pytest.approx(np.pi / 2)


def test_closest_unitary():
    rng = np.random.default_rng(2)
    U = closest_unitary(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    assert unitarity_defect(U) < 1e-12
