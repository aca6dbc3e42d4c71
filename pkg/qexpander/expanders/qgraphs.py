"""Tracial quantum graphs on multimatrix algebras.

M = ⊕_a M_{n_a} carries ψ = Σ_a n_a·Tr_a. Vectors of L²(M, ψ) are stored as coordinates in the
ψ-orthonormal basis f^a_ij = e^a_ij/√n_a, ordered block by block and row-major inside a block.
In this basis the multiplication reads m(f^a_ij ⊗ f^a_jl) = f^a_il/√n_a and m* is the
transpose of m, so m∘m* is the identity.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .exceptions import InputError, NotRegular, NotUndirected
from .numerics import ComplexMatrix, as_matrix, hermitian_eigvals

settings = ExpanderSettings()


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    block_dims: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.block_dims or any(n < 1 for n in self.block_dims):
            raise InputError(f"block dimensions must be positive, got {self.block_dims}")

    @property
    def dimension(self) -> int:
        """Σ n_a², the dimension of L²(M, ψ)."""
        return sum(n * n for n in self.block_dims)

    @property
    def offsets(self) -> List[int]:
        starts = [0]
        for n in self.block_dims[:-1]:
            starts.append(starts[-1] + n * n)
        return starts

    def index(self, block: int, i: int, j: int) -> int:
        return self.offsets[block] + i * self.block_dims[block] + j

    def to_coords(self, blocks: Sequence[npt.ArrayLike]) -> npt.NDArray[np.complex128]:
        """Coordinates of ⊕ x_a: the f-coefficient of e^a_ij is √n_a."""
        parts = [np.sqrt(n) * as_matrix(x).reshape(-1) for n, x in zip(self.block_dims, blocks)]
        return np.concatenate(parts)

    def from_coords(self, coords: npt.ArrayLike) -> List[ComplexMatrix]:
        vector = np.asarray(coords, dtype=np.complex128)
        return [vector[start : start + n * n].reshape(n, n) / np.sqrt(n) for start, n in zip(self.offsets, self.block_dims)]

    def unit(self) -> npt.NDArray[np.complex128]:
        return self.to_coords([np.eye(n) for n in self.block_dims])

    def psi(self, coords: npt.ArrayLike) -> complex:
        """ψ(x) = ⟨1, x⟩ in L²(M, ψ)."""
        return complex(np.vdot(self.unit(), np.asarray(coords)))

    def product(self, first: npt.ArrayLike, second: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        return self.to_coords([x @ y for x, y in zip(self.from_coords(first), self.from_coords(second))])

    def gram(self) -> npt.NDArray[np.float64]:
        """Gram matrix of ψ on the matrix units e^a_ij, diagonal with entries n_a."""
        return np.diag(np.concatenate([np.full(n * n, float(n)) for n in self.block_dims]))


@dataclass(frozen=True, eq=False)
class QuantumGraph:
    """Adjacency operator A on L²(M, ψ) as a dense matrix in the f-basis."""

    algebra: MultiMatrixAlgebra
    A: ComplexMatrix
    degree: Optional[float] = None

    def __post_init__(self) -> None:
        L = self.algebra.dimension
        if self.A.shape != (L, L):
            raise InputError(f"adjacency of shape {self.A.shape} does not act on a space of dimension {L}")


def multiplication(alg: MultiMatrixAlgebra) -> npt.NDArray[np.float64]:
    """m: L² ⊗ L² → L² as an (L, L²) matrix."""
    L = alg.dimension
    m = np.zeros((L, L * L))
    for block, n in enumerate(alg.block_dims):
        weight = 1 / np.sqrt(n)
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    m[alg.index(block, i, l), alg.index(block, i, j) * L + alg.index(block, j, l)] = weight
    return m


def mult_adjoint(alg: MultiMatrixAlgebra) -> npt.NDArray[np.float64]:
    """Hilbert space adjoint m*: L² → L² ⊗ L², an (L², L) matrix.

    m*(f^a_il) = (1/√n_a) Σ_j f^a_ij ⊗ f^a_jl, so m*(e_uv) = n⁻¹ Σ_w e_uw ⊗ e_wv on a single
    block of size n.
    """
    return multiplication(alg).T


def _block_images(QG: QuantumGraph, source: int, target: int) -> npt.NDArray[np.complex128]:
    """images[i, j] = block `target` of A(f^source_ij), as coordinates reshaped to a matrix."""
    alg = QG.algebra
    n_s, n_t = alg.block_dims[source], alg.block_dims[target]
    start_s, start_t = alg.offsets[source], alg.offsets[target]
    rows = QG.A[start_t : start_t + n_t * n_t, start_s : start_s + n_s * n_s]
    return rows.reshape(n_t, n_t, n_s, n_s).transpose(2, 3, 0, 1)


def schur_square(QG: QuantumGraph) -> ComplexMatrix:
    """m∘(A⊗A)∘m* computed block by block without forming A⊗A."""
    alg = QG.algebra
    L = alg.dimension
    result = np.zeros((L, L), dtype=np.complex128)
    for source, n_s in enumerate(alg.block_dims):
        start_s = alg.offsets[source]
        for target, n_t in enumerate(alg.block_dims):
            start_t = alg.offsets[target]
            images = _block_images(QG, source, target)
            # Σ_j A(f_ij)·A(f_jl) inside block t, product weight 1/√n_t, m* weight 1/√n_s
            square = np.einsum("ijpq,jlqr->ilpr", images, images) / np.sqrt(n_s * n_t)
            result[start_t : start_t + n_t * n_t, start_s : start_s + n_s * n_s] = square.transpose(2, 3, 0, 1).reshape(n_t * n_t, n_s * n_s)
    return result


def is_quantum_adjacency(QG: QuantumGraph, tol: float = settings.RANK_TOL) -> bool:
    """Schur idempotency ‖m(A⊗A)m* − A‖ ≤ tol in operator norm."""
    return bool(np.linalg.norm(schur_square(QG) - QG.A, 2) <= tol)


def blockwise_choi(QG: QuantumGraph, source: int, target: int) -> ComplexMatrix:
    """Choi matrix of x ↦ A(x) restricted to block `source` and read off on block `target`.

    The ψ-weights contribute the positive factor √n_s/√n_t only, which is dropped.
    """
    images = _block_images(QG, source, target)  # [i, j, p, r] ~ A(e_ij)[p, r]
    n_s, n_t = images.shape[0], images.shape[2]
    return images.transpose(0, 2, 1, 3).reshape(n_s * n_t, n_s * n_t)


def is_completely_positive(QG: QuantumGraph, tol: float = settings.RANK_TOL) -> bool:
    for source in range(len(QG.algebra.block_dims)):
        for target in range(len(QG.algebra.block_dims)):
            J = blockwise_choi(QG, source, target)
            if np.abs(J - J.conj().T).max() > tol or hermitian_eigvals(J, tol)[0] < -tol:
                return False
    return True


def is_regular(QG: QuantumGraph, tol: float = settings.RANK_TOL) -> Optional[float]:
    """d with A1 = A*1 = d1 within tol, else None."""
    unit = QG.algebra.unit()
    image = QG.A @ unit
    d = float(np.vdot(unit, image).real / np.vdot(unit, unit).real)
    scale = max(1.0, abs(d)) * np.linalg.norm(unit)
    if np.linalg.norm(image - d * unit) > tol * scale:
        return None
    if np.linalg.norm(QG.A.conj().T @ unit - d * unit) > tol * scale:
        return None
    return d


def gap(QG: QuantumGraph) -> Tuple[npt.NDArray[np.float64], Optional[float]]:
    """Descending spectrum of d⁻¹A on L²(M, ψ) and its second entry.

    Raises:
        NotRegular: If A is not regular.
        NotUndirected: If A is not self-adjoint.
    """
    d = is_regular(QG)
    if d is None or abs(d) < settings.DEFAULT_TOL:
        raise NotRegular("quantum graph is not regular")
    if np.abs(QG.A - QG.A.conj().T).max() > settings.DEFAULT_TOL * max(1.0, abs(d)):
        raise NotUndirected("adjacency is not self-adjoint on L2(M, psi)")
    spectrum = hermitian_eigvals(QG.A / d, 1e-8)[::-1]
    return spectrum, (float(spectrum[1]) if spectrum.size > 1 else None)


def complete_quantum_graph(alg: MultiMatrixAlgebra) -> QuantumGraph:
    """A(x) = ψ(x)1, regular of degree ψ(1) = Σ n_a²."""
    unit = alg.unit()
    return QuantumGraph(algebra=alg, A=np.outer(unit, unit.conj()), degree=float(alg.dimension))


def from_channel(transfer: npt.ArrayLike, scale: float) -> QuantumGraph:
    """Quantum graph scale·Φ on M_n from a channel's transfer matrix.

    On a single block the f-basis is the matrix-unit basis up to one common factor, so the
    transfer matrix is already the matrix of Φ on L²(M_n, ψ).
    """
    matrix = as_matrix(transfer)
    n = round(np.sqrt(matrix.shape[0]))
    if n * n != matrix.shape[0]:
        raise InputError("transfer matrix size is not a square")
    return QuantumGraph(algebra=MultiMatrixAlgebra((n,)), A=scale * matrix, degree=scale)


def normalized_choi(QG: QuantumGraph) -> ComplexMatrix:
    """J_A / n for a quantum graph on a single block M_n; a projection of rank d for quantum adjacencies."""
    if len(QG.algebra.block_dims) != 1:
        raise InputError("normalized Choi matrix is defined on a full matrix algebra")
    n = QG.algebra.block_dims[0]
    return blockwise_choi(QG, 0, 0) / n
