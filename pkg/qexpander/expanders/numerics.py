"""Dense complex linear algebra shared by every other module."""

from typing import Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..settings import ExpanderSettings
from .exceptions import NotHermitian, NotPSD

settings = ExpanderSettings()

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]


def as_matrix(M: npt.ArrayLike) -> ComplexMatrix:
    """Return `M` as a two-dimensional complex128 array."""
    array = np.asarray(M, dtype=np.complex128)
    if array.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of shape {array.shape}")
    return array


def hermitian_deviation(M: npt.ArrayLike) -> float:
    """Largest entrywise deviation max |M[i,j] - conj(M[j,i])|."""
    array = as_matrix(M)
    if array.size == 0:
        return 0.0
    return float(np.abs(array - array.conj().T).max())


def is_hermitian(M: npt.ArrayLike, tol: float = settings.HERMITIAN_TOL) -> bool:
    """Check Hermiticity relative to the largest entry (absolute for small matrices)."""
    array = as_matrix(M)
    scale = max(1.0, float(np.abs(array).max(initial=0.0)))
    return hermitian_deviation(array) <= tol * scale


def hermitian_eig(M: npt.ArrayLike, tol: float = settings.HERMITIAN_TOL) -> Tuple[RealVector, ComplexMatrix]:
    """Eigendecomposition of a Hermitian matrix.

    The Hermitian part (M + M†)/2 is passed to LAPACK's divide and conquer driver, which is
    deterministic for a fixed input bit pattern.

    Args:
        M: Square matrix, Hermitian within `tol` relative to its largest entry.
        tol: Allowed symmetry deviation.

    Returns:
        Eigenvalues in ascending order and the matching orthonormal eigenvectors as columns.

    Raises:
        NotHermitian: If the symmetry deviation exceeds `tol`.
    """
    array = as_matrix(M)
    if array.shape[0] != array.shape[1]:
        raise NotHermitian(f"matrix of shape {array.shape} is not square")
    if not is_hermitian(array, tol):
        raise NotHermitian(f"symmetry deviation {hermitian_deviation(array):.3e} exceeds {tol:.1e}")
    if array.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    eigenvalues, eigenvectors = scipy.linalg.eigh((array + array.conj().T) / 2)
    return eigenvalues, eigenvectors


def hermitian_eigvals(M: npt.ArrayLike, tol: float = settings.HERMITIAN_TOL) -> RealVector:
    """Ascending eigenvalues of a Hermitian matrix."""
    return hermitian_eig(M, tol)[0]


def kron(A: npt.ArrayLike, B: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product with the row-major block convention (A⊗B)[i·rB+k, j·cB+l] = A[i,j]·B[k,l]."""
    return np.kron(as_matrix(A), as_matrix(B))


def rank_eps(M: npt.ArrayLike, tol: float = settings.RANK_TOL) -> int:
    """Number of eigenvalues above `tol` of a positive semidefinite matrix.

    Raises:
        NotPSD: If an eigenvalue is below -tol.
    """
    eigenvalues = hermitian_eigvals(M, max(tol, settings.HERMITIAN_TOL))
    if eigenvalues.size and eigenvalues[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {eigenvalues[0]:.3e} is below -{tol:.1e}")
    return int(np.count_nonzero(eigenvalues > tol))


def is_projection(M: npt.ArrayLike, tol: float = settings.RANK_TOL) -> bool:
    """True iff ‖M² − M‖ ≤ tol and ‖M − M†‖ ≤ tol in operator norm."""
    array = as_matrix(M)
    if array.shape[0] != array.shape[1]:
        return False
    idempotency = np.linalg.norm(array @ array - array, 2) if array.size else 0.0
    symmetry = np.linalg.norm(array - array.conj().T, 2) if array.size else 0.0
    return bool(idempotency <= tol and symmetry <= tol)


def unitarity_defect(U: npt.ArrayLike) -> float:
    """Operator norm of U†U − I."""
    array = as_matrix(U)
    return float(np.linalg.norm(array.conj().T @ array - np.eye(array.shape[1]), 2))


def closest_unitary(M: npt.ArrayLike) -> ComplexMatrix:
    """Unitary factor of the polar decomposition of `M`."""
    unitary, _ = scipy.linalg.polar(as_matrix(M))
    return unitary


def null_space(M: npt.ArrayLike, tol: float) -> ComplexMatrix:
    """Orthonormal basis of the vectors v with ‖Mv‖ small; singular values ≤ tol count as zero."""
    array = as_matrix(M)
    _, singular_values, vh = scipy.linalg.svd(array)
    rank = int(np.count_nonzero(singular_values > tol))
    return vh[rank:].conj().T


def subspace_distance(A: npt.ArrayLike, B: npt.ArrayLike) -> float:
    """Largest principal angle between the column spans of A and B; π/2 if the dimensions differ."""
    first, second = as_matrix(A), as_matrix(B)
    if first.shape[1] != second.shape[1]:
        return float(np.pi / 2)
    if first.shape[1] == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(first, second)))


def vec(M: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Row-major vectorization: vec(AXB) = (A ⊗ Bᵀ) vec(X)."""
    return as_matrix(M).reshape(-1)


def unvec(v: npt.ArrayLike, n: int) -> ComplexMatrix:
    return np.asarray(v, dtype=np.complex128).reshape(n, n)
