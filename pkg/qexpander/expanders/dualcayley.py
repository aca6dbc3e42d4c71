"""Quantum Cayley and Schreier graphs over the dual of a finite group.

Elements of vN(G) are coefficient vectors c in the λ-basis, a = Σ_g c_g λ_g. The Fourier
transform sends a to its blocks ⊕_x Σ_g c_g π_x(g) in ℓ∞(Ĝ) = ⊕_x B(H_x), where the Haar weight
ĥ(λ_g) = |G|·[g = e] coincides with ψ = Σ_x dim x · Tr_x.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .exceptions import (
    CertificateViolated,
    ContainsIdentity,
    ContainsTrivial,
    InputError,
    NotASubgroup,
    NotGenerating,
    NotInvariant,
    NotSymmetric,
)
from .groups import FiniteGroup, Irrep, check_symmetric, coset_labels, irreps, is_subgroup, subgroup_group
from .numerics import ComplexMatrix, unitarity_defect
from .qgraphs import MultiMatrixAlgebra, QuantumGraph, gap
from .reports import SchreierCertificate

settings = ExpanderSettings()

Coefficients = npt.NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class DualGroupAlgebra:
    group: FiniteGroup
    irreps: Tuple[Irrep, ...]

    def __post_init__(self) -> None:
        if sum(rep.dimension**2 for rep in self.irreps) != self.group.order:
            raise InputError("irreducible dimensions do not square-sum to the group order")

    @classmethod
    def of(cls, group: FiniteGroup, seed: int = settings.DEFAULT_SEED) -> "DualGroupAlgebra":
        return cls(group=group, irreps=tuple(irreps(group, seed)))

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def block_dims(self) -> Tuple[int, ...]:
        return tuple(rep.dimension for rep in self.irreps)

    @property
    def blocks(self) -> MultiMatrixAlgebra:
        return MultiMatrixAlgebra(self.block_dims)

    def basis(self, g: int) -> Coefficients:
        """λ_g."""
        c = np.zeros(self.order, dtype=np.complex128)
        c[g] = 1.0
        return c

    def unit(self) -> Coefficients:
        return self.basis(0)

    def product(self, a: npt.ArrayLike, b: npt.ArrayLike) -> Coefficients:
        """(ab)_k = Σ_g a_g b_{g⁻¹k}."""
        result = np.zeros(self.order, dtype=np.complex128)
        np.add.at(result, self.group.mult, np.outer(a, b))
        return result

    def star(self, a: npt.ArrayLike) -> Coefficients:
        return np.asarray(a, dtype=np.complex128).conj()[self.group.inv]

    def antipode(self, a: npt.ArrayLike) -> Coefficients:
        """Ŝ(λ_g) = λ_{g⁻¹}."""
        return np.asarray(a, dtype=np.complex128)[self.group.inv]

    def counit(self, a: npt.ArrayLike) -> complex:
        """ε̂(λ_g) = 1."""
        return complex(np.sum(a))

    def haar(self, a: npt.ArrayLike) -> complex:
        """ĥ(λ_g) = |G|·[g = e]."""
        return complex(self.order * np.asarray(a)[0])

    def fourier(self, a: npt.ArrayLike) -> List[ComplexMatrix]:
        coefficients = np.asarray(a, dtype=np.complex128)
        return [np.einsum("g,gij->ij", coefficients, rep.matrices) for rep in self.irreps]

    def inverse_fourier(self, blocks: Sequence[npt.ArrayLike]) -> Coefficients:
        """c_g = |G|⁻¹ Σ_x dim x · Tr(π_x(g)* X_x)."""
        c = np.zeros(self.order, dtype=np.complex128)
        for rep, X in zip(self.irreps, blocks):
            c += rep.dimension * np.einsum("gji,ji->g", rep.matrices.conj(), np.asarray(X))
        return c / self.order

    def fourier_matrix(self) -> ComplexMatrix:
        """Column g holds the ψ-orthonormal coordinates of λ_g; divided by √|G| it is unitary."""
        columns = [np.sqrt(rep.dimension) * rep.matrices.reshape(self.order, -1).T for rep in self.irreps]
        return np.concatenate(columns, axis=0)


@dataclass(frozen=True, eq=False)
class Coideal:
    """Subgroup coideal span{λ_h : h ∈ H} of vN(G)."""

    algebra: DualGroupAlgebra
    elements: Tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.elements)


def central_projection(alg: DualGroupAlgebra, E: Iterable[int]) -> Coefficients:
    """p_E = Σ_{x∈E} p_x with c_g = Σ_{x∈E} (dim x/|G|)·conj(χ_x(g)).

    Args:
        alg: Dual group algebra.
        E: Indices into `alg.irreps`.
    """
    c = np.zeros(alg.order, dtype=np.complex128)
    for x in sorted(set(E)):
        rep = alg.irreps[x]
        c += rep.dimension * rep.character.conj() / alg.order
    return c


def is_symmetric_subset(alg: DualGroupAlgebra, E: Iterable[int], tol: float = 1e-10) -> bool:
    p = central_projection(alg, E)
    return bool(np.abs(alg.antipode(p) - p).max() <= tol)


def convolve(alg: DualGroupAlgebra, a: npt.ArrayLike, b: npt.ArrayLike) -> Coefficients:
    """a⋆b with (a⋆b)_g = |G|·a_g·b_g."""
    return alg.order * np.asarray(a, dtype=np.complex128) * np.asarray(b, dtype=np.complex128)


def conjugate_intertwiners(alg: DualGroupAlgebra, seed: int = settings.DEFAULT_SEED) -> List[Tuple[int, ComplexMatrix]]:
    """For every irrep x, the index of x̄ and a unitary T with conj(π_x(g)) = T π_x̄(g) T†."""
    rng = np.random.default_rng(seed)
    pairs = []
    for rep in alg.irreps:
        target = rep.character.conj()
        bar = next(i for i, other in enumerate(alg.irreps) if np.abs(other.character - target).max() <= 1e-6)
        n = rep.dimension
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        T = np.einsum("gij,jk,glk->il", rep.matrices.conj(), M, alg.irreps[bar].matrices.conj()) / alg.order
        pairs.append((bar, T * np.sqrt(n / np.vdot(T, T).real)))
    return pairs


def _block_antipode(blocks: Sequence[ComplexMatrix], conjugates: Sequence[Tuple[int, ComplexMatrix]]) -> List[ComplexMatrix]:
    # Ŝ(X)_x = (T_x X_x̄ T_x†)ᵀ
    return [(T @ blocks[bar] @ T.conj().T).T for bar, T in conjugates]


def _block_haar(alg: DualGroupAlgebra, blocks: Sequence[ComplexMatrix]) -> complex:
    return complex(sum(rep.dimension * np.trace(X) for rep, X in zip(alg.irreps, blocks)))


def convolve_definitional(alg: DualGroupAlgebra, a: npt.ArrayLike, b: npt.ArrayLike) -> Coefficients:
    """(ω_a∘Ŝ ⊗ id)Δ̂(b) with ω_a = ĥ(· a), evaluated in ⊕_x B(H_x).

    Δ̂(b) is pushed through π_x ⊗ π_y for every pair of irreps. The antipode, the product with a
    and the Haar weight act on the first leg blockwise; the second leg is transformed back.
    """
    conjugates = conjugate_intertwiners(alg)
    a_blocks = alg.fourier(a)
    coefficients = np.asarray(b, dtype=np.complex128)
    result = [np.zeros((n, n), dtype=np.complex128) for n in alg.block_dims]
    for x, rep_x in enumerate(alg.irreps):
        n = rep_x.dimension
        weights = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                unit = [np.zeros((m, m), dtype=np.complex128) for m in alg.block_dims]
                unit[x][i, j] = 1.0
                flipped = _block_antipode(unit, conjugates)
                weights[i, j] = _block_haar(alg, [S @ A for S, A in zip(flipped, a_blocks)])
        for y, rep_y in enumerate(alg.irreps):
            result[y] += np.einsum("g,gij,gkl,ij->kl", coefficients, rep_x.matrices, rep_y.matrices, weights)
    return alg.inverse_fourier(result)


def cayley_multipliers(alg: DualGroupAlgebra, E: Iterable[int]) -> npt.NDArray[np.float64]:
    """n_E(g) = Σ_{x∈E} dim x · conj(χ_x(g)), the eigenvalue of x ↦ p_E⋆x on λ_g."""
    values = alg.order * central_projection(alg, E)
    if np.abs(values.imag).max() > 1e-9:
        raise NotSymmetric("irrep subset is not closed under conjugation")
    return values.real


def cayley_connected(alg: DualGroupAlgebra, E: Iterable[int]) -> bool:
    """Whether the eigenvalue d of x ↦ p_E⋆x is simple: n_E(g) < d for every g ≠ e."""
    subset = sorted(set(E))
    multipliers = cayley_multipliers(alg, subset)
    d = float(sum(alg.irreps[x].dimension ** 2 for x in subset))
    return not np.any(multipliers[1:] >= d - 1e-9)


def quantum_cayley(alg: DualGroupAlgebra, E: Iterable[int]) -> QuantumGraph:
    """Adjacency x ↦ p_E⋆x on L²(vN(G), ĥ), written in the ψ-orthonormal block basis.

    Raises:
        ContainsTrivial: If E contains the trivial irrep.
        NotSymmetric: If Ŝ(p_E) ≠ p_E.
    """
    subset = sorted(set(E))
    if any(alg.irreps[x].is_trivial() for x in subset):
        raise ContainsTrivial("generating irrep subset contains the trivial representation")
    if not is_symmetric_subset(alg, subset):
        raise NotSymmetric(f"irrep subset {subset} is not closed under conjugation")
    multipliers = cayley_multipliers(alg, subset)
    F = alg.fourier_matrix() / np.sqrt(alg.order)
    A = (F * multipliers) @ F.conj().T
    d = float(sum(alg.irreps[x].dimension ** 2 for x in subset))
    if not cayley_connected(alg, subset):
        logging.warning(f"Quantum Cayley graph for {subset} is not connected")
    logging.info(f"Quantum Cayley graph of degree {d:g} on blocks {list(alg.block_dims)}")
    return QuantumGraph(algebra=alg.blocks, A=A, degree=d)


def coideal_from_subgroup(alg: DualGroupAlgebra, H: Iterable[int]) -> Coideal:
    """span{λ_h : h ∈ H}; closed under products and the star, and Δ̂(λ_h) = λ_h ⊗ λ_h.

    Raises:
        NotASubgroup: If H is not a subgroup.
    """
    elements = tuple(sorted(set(int(h) for h in H)))
    if not is_subgroup(alg.group, elements):
        raise NotASubgroup(f"{list(elements)} is not a subgroup")
    return Coideal(algebra=alg, elements=elements)


def schreier_restrict(QG: QuantumGraph, C: Coideal, seed: int = settings.DEFAULT_SEED) -> QuantumGraph:
    """Restriction of a quantum Cayley graph to a subgroup coideal.

    The result lives on vN(H) ≅ ⊕_{y∈Irr(H)} B(H_y) and stays diagonal in the λ_h basis.

    Raises:
        NotInvariant: If A moves span(C) outside itself.
    """
    alg = C.algebra
    F = alg.fourier_matrix() / np.sqrt(alg.order)
    A_lambda = F.conj().T @ QG.A @ F
    inside = np.asarray(C.elements)
    outside = np.setdiff1d(np.arange(alg.order), inside)
    scale = max(1.0, float(np.abs(A_lambda).max()))
    if outside.size and np.abs(A_lambda[np.ix_(outside, inside)]).max() > 1e-10 * scale:
        raise NotInvariant("adjacency does not leave the coideal invariant")
    subgroup, _ = subgroup_group(alg.group, inside)
    restricted = DualGroupAlgebra.of(subgroup, seed)
    F_H = restricted.fourier_matrix() / np.sqrt(restricted.order)
    A = F_H @ A_lambda[np.ix_(inside, inside)] @ F_H.conj().T
    return QuantumGraph(algebra=restricted.blocks, A=A, degree=QG.degree)


def classical_cayley_operator(Gamma: FiniteGroup, E: Iterable[int], H: Iterable[int]) -> QuantumGraph:
    """Af(g) = Σ_{s∈E} f(sg) on functions constant on left cosets gH.

    Entry (i, j) counts the s ∈ E with s·g_iH = g_jH; the algebra ℓ∞(Γ/H) has one 1×1 block per
    coset.

    Raises:
        NotSymmetric: If E ≠ E⁻¹.
        ContainsIdentity: If e ∈ E.
    """
    elements = check_symmetric(Gamma, E)
    if 0 in elements:
        raise ContainsIdentity("generating set contains the identity")
    partition, labels = coset_labels(Gamma, H)
    A = np.zeros((len(partition), len(partition)))
    for i, coset in enumerate(partition):
        for s in elements:
            A[i, labels[Gamma.mult[s, coset[0]]]] += 1
    return QuantumGraph(algebra=MultiMatrixAlgebra((1,) * len(partition)), A=A, degree=float(len(elements)))


def schreier_gap_certificate(restricted: QuantumGraph, eps: float, E_dims: Sequence[int], tol: float = settings.DEFAULT_TOL) -> SchreierCertificate:
    """Assert λ₂(M, E) ≤ 1 − λ·ε²/2 with λ = min_s dim H_s / d.

    Raises:
        CertificateViolated: If the restricted second eigenvalue exceeds the bound.
    """
    _, value = gap(restricted)
    d = float(restricted.degree) if restricted.degree is not None else float(sum(n * n for n in E_dims))
    lam = min(E_dims) / d
    bound = 1 - lam * eps * eps / 2
    if value is not None and value > bound + tol:
        raise CertificateViolated("Schreier spectral gap bound", value, bound)
    return SchreierCertificate(d=d, lam=lam, eps=eps, lambda2=value, bound=bound, degenerate=value is None, passed=True)


def dual_kazhdan_bound(alg: DualGroupAlgebra, E: Iterable[int]) -> float:
    """ε = min_{g≠e} √(2(1 − Re χ_E(g)/dim H_E)) for the block representation ⊕_{x∈E} π_x.

    The mean of ‖π_E(g)ξ − ξ‖² over an orthonormal basis of H_E is 2(1 − Re χ_E(g)/dim H_E),
    which bounds the maximum from below.

    Raises:
        NotGenerating: If some g ≠ e acts trivially on H_E.
    """
    subset = sorted(set(E))
    character = sum(alg.irreps[x].character for x in subset)
    dim = sum(alg.irreps[x].dimension for x in subset)
    if alg.order == 1:
        return 2.0
    deficits = 2 * (1 - character[1:].real / dim)
    eps = float(np.sqrt(max(0.0, float(deficits.min()))))
    if eps <= 1e-12:
        raise NotGenerating(f"irrep subset {subset} has a kernel")
    return eps


def representation_block(alg: DualGroupAlgebra, x: int, pvm: Sequence[npt.ArrayLike]) -> ComplexMatrix:
    """U^x = Σ_g π_x(g) ⊗ P_g for a projection-valued measure {P_g} indexed by the group.

    Raises:
        InputError: If the PVM is not indexed by the group or U^x is not unitary.
    """
    if len(pvm) != alg.order:
        raise InputError(f"need one projection per group element, got {len(pvm)}")
    rep = alg.irreps[x]
    U = sum(np.kron(rep.matrices[g], np.asarray(P, dtype=np.complex128)) for g, P in enumerate(pvm))
    if unitarity_defect(U) > 1e-8:
        raise InputError("projections do not form a PVM")
    return U


def dual_group(Gamma: FiniteGroup, characters: Sequence[Irrep]) -> FiniteGroup:
    """Pontryagin dual of an abelian group; element i is characters[i], element 0 trivial.

    Raises:
        InputError: If some irreducible is not one-dimensional.
    """
    if any(rep.dimension != 1 for rep in characters) or len(characters) != Gamma.order:
        raise InputError("the dual group needs all one-dimensional characters of an abelian group")
    values = np.stack([rep.matrices[:, 0, 0] for rep in characters])
    products = values[:, None, :] * values[None, :, :]
    mult = np.abs(products[:, :, None, :] - values[None, None, :, :]).max(axis=-1).argmin(axis=-1)
    inv = np.abs(values.conj()[:, None, :] - values[None, :, :]).max(axis=-1).argmin(axis=-1)
    return FiniteGroup(mult=mult.astype(np.int64), inv=inv.astype(np.int64))


def restricted_spectra(QG: QuantumGraph, alg: DualGroupAlgebra, subgroups: Iterable[Sequence[int]], seed: int = settings.DEFAULT_SEED) -> List[Tuple[List[int], npt.NDArray[np.float64], Optional[float]]]:
    """Normalized spectrum and λ₂(M, E) for each subgroup coideal."""
    rows = []
    for H in subgroups:
        spectrum, value = gap(schreier_restrict(QG, coideal_from_subgroup(alg, H), seed))
        rows.append((list(H), spectrum, value))
    return rows
