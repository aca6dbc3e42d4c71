"""Finite groups, their irreducible unitary representations and Kazhdan-type certificates."""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .exceptions import ClosureTooLarge, InputError, NotASubgroup, NotGenerating, NotSymmetric, SplitFailed
from .numerics import hermitian_eigvals

settings = ExpanderSettings()

IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A group given by its multiplication table; element 0 is the identity.

    `mult[g, h]` is the index of the product gh. When the group was closed from permutations,
    `permutations[g]` holds the image list of element g (0-based points) and products compose
    right to left: (gh)(i) = g(h(i)).
    """

    mult: IntArray
    inv: IntArray
    permutations: Optional[IntArray] = None

    def __post_init__(self) -> None:
        n = self.mult.shape[0]
        if self.mult.shape != (n, n) or self.inv.shape != (n,):
            raise InputError("multiplication table must be square with one inverse per element")
        if n == 0:
            raise InputError("a group has at least one element")
        arange = np.arange(n)
        if not (np.array_equal(self.mult[0], arange) and np.array_equal(self.mult[:, 0], arange)):
            raise InputError("element 0 is not the identity")
        if not (np.all(self.mult[arange, self.inv] == 0) and np.all(self.mult[self.inv, arange] == 0)):
            raise InputError("inverse table is inconsistent with the multiplication table")
        if np.any(np.sort(self.mult, axis=1) != arange):
            raise InputError("multiplication table is not a Latin square")
        self._check_associativity()

    def _check_associativity(self) -> None:
        n = self.order
        if n <= 64:
            left = self.mult[self.mult]  # (gh)k indexed [g, h, k]
            right = self.mult[:, self.mult]  # g(hk) indexed [g, h, k]
            if not np.array_equal(left, right):
                raise InputError("multiplication table is not associative")
            return
        rng = np.random.default_rng(0)
        g, h, k = rng.integers(0, n, size=(3, settings.ASSOCIATIVITY_SAMPLES))
        if not np.array_equal(self.mult[self.mult[g, h], k], self.mult[g, self.mult[h, k]]):
            raise InputError("multiplication table is not associative on sampled triples")

    @property
    def order(self) -> int:
        return int(self.mult.shape[0])

    @property
    def identity(self) -> int:
        return 0

    def product(self, *elements: int) -> int:
        result = 0
        for element in elements:
            result = int(self.mult[result, element])
        return result

    def inverse(self, g: int) -> int:
        return int(self.inv[g])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def element_order(self, g: int) -> int:
        power, count = g, 1
        while power != 0:
            power = int(self.mult[power, g])
            count += 1
        return count

    def index_of(self, permutation: Sequence[int]) -> int:
        """Index of the element with the given image list."""
        if self.permutations is None:
            raise InputError("group was not built from permutations")
        target = np.asarray(permutation)
        if target.shape != (self.permutations.shape[1],):
            raise InputError(f"permutation acts on {target.shape[0]} points, group acts on {self.permutations.shape[1]}")
        matches = np.nonzero(np.all(self.permutations == target, axis=1))[0]
        if matches.size == 0:
            raise InputError(f"permutation {list(permutation)} is not an element of the group")
        return int(matches[0])


@dataclass(frozen=True, eq=False)
class Irrep:
    """Irreducible unitary representation: `matrices[g]` is π(g)."""

    matrices: npt.NDArray[np.complex128]

    @property
    def dimension(self) -> int:
        return int(self.matrices.shape[1])

    @property
    def character(self) -> npt.NDArray[np.complex128]:
        return np.trace(self.matrices, axis1=1, axis2=2)

    def is_trivial(self, tol: float = 1e-8) -> bool:
        return self.dimension == 1 and bool(np.abs(self.matrices[:, 0, 0] - 1).max() <= tol)

    def __call__(self, g: int) -> npt.NDArray[np.complex128]:
        return self.matrices[g]

    def homomorphism_defect(self, group: FiniteGroup) -> float:
        """Largest deviation of π(g)π(h) from π(gh), unitarity and π(e) = I."""
        n = group.order
        pairs: Iterable[int] = range(n)
        if n > 64:
            pairs = np.random.default_rng(1).integers(0, n, size=64)
        defect = float(np.abs(self.matrices[0] - np.eye(self.dimension)).max())
        for g in pairs:
            products = np.einsum("ab,hbc->hac", self.matrices[g], self.matrices)
            defect = max(defect, float(np.abs(products - self.matrices[group.mult[g]]).max()))
        gram = np.einsum("gba,gbc->gac", self.matrices.conj(), self.matrices)
        return max(defect, float(np.abs(gram - np.eye(self.dimension)).max()))


def direct_sum(*representations: Irrep) -> npt.NDArray[np.complex128]:
    """Block diagonal matrices of a direct sum of representations, indexed by element."""
    n = representations[0].matrices.shape[0]
    total = sum(rep.dimension for rep in representations)
    matrices = np.zeros((n, total, total), dtype=np.complex128)
    offset = 0
    for rep in representations:
        k = rep.dimension
        matrices[:, offset : offset + k, offset : offset + k] = rep.matrices
        offset += k
    return matrices


def from_multiplication_table(table: npt.ArrayLike) -> FiniteGroup:
    """Build a group from a multiplication table whose row and column 0 belong to the identity."""
    mult = np.asarray(table, dtype=np.int64)
    if mult.ndim != 2 or mult.shape[0] != mult.shape[1]:
        raise InputError(f"multiplication table must be square, got shape {mult.shape}")
    rows, cols = np.nonzero(mult == 0)
    inv = np.full(mult.shape[0], -1, dtype=np.int64)
    inv[rows] = cols
    if np.any(inv < 0):
        raise InputError("some element has no inverse")
    return FiniteGroup(mult=mult, inv=inv)


def _permutation_keys(permutations: IntArray) -> npt.NDArray:
    points = permutations.shape[1]
    if points <= 15:
        weights = np.asarray([points**k for k in range(points)], dtype=np.int64)
        return permutations.astype(np.int64) @ weights
    weights = np.asarray([points**k for k in range(points)], dtype=object)
    return permutations.astype(object) @ weights


def from_permutation_generators(perms: Sequence[Sequence[int]]) -> FiniteGroup:
    """Close a set of permutations (0-based image lists) under composition.

    Elements are numbered in breadth-first discovery order from the identity, multiplying
    discovered elements on the right by generators.

    Args:
        perms: Generators, all acting on the same ground set.

    Returns:
        The generated group, carrying its permutations.

    Raises:
        ClosureTooLarge: If more than MAX_GROUP_ORDER elements are generated.
    """
    generators = [np.asarray(p, dtype=np.int64) for p in perms]
    points = generators[0].shape[0] if generators else 1
    for generator in generators:
        if generator.shape != (points,) or sorted(generator.tolist()) != list(range(points)):
            raise InputError(f"{generator.tolist()} is not a permutation of {points} points")

    identity = tuple(range(points))
    seen: Dict[Tuple[int, ...], int] = {identity: 0}
    elements = [np.arange(points)]
    queue = deque([np.arange(points)])
    while queue:
        current = queue.popleft()
        for generator in generators:
            image = current[generator]
            key = tuple(image.tolist())
            if key in seen:
                continue
            if len(elements) >= settings.MAX_GROUP_ORDER:
                raise ClosureTooLarge(f"closure exceeds {settings.MAX_GROUP_ORDER} elements")
            seen[key] = len(elements)
            elements.append(image)
            queue.append(image)

    table = np.stack(elements)
    n = table.shape[0]
    keys = _permutation_keys(table)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    mult = np.empty((n, n), dtype=np.int64)
    for h in range(n):
        composed = table[:, table[h]]  # (g∘h)(i) = g[h[i]]
        mult[:, h] = order[np.searchsorted(sorted_keys, _permutation_keys(composed))]
    inv = np.empty(n, dtype=np.int64)
    rows, cols = np.nonzero(mult == 0)
    inv[rows] = cols
    logging.info(f"Closed {len(generators)} generators into a group of order {n}")
    return FiniteGroup(mult=mult, inv=inv, permutations=table)


def cyclic_group(n: int) -> FiniteGroup:
    arange = np.arange(n)
    return FiniteGroup(mult=(arange[:, None] + arange[None, :]) % n, inv=(-arange) % n)


def symmetric_group(n: int) -> FiniteGroup:
    """S_n on points 0..n-1, generated by an n-cycle and a transposition."""
    if n == 1:
        return from_permutation_generators([[0]])
    cycle = list(range(1, n)) + [0]
    swap = [1, 0, *range(2, n)]
    return from_permutation_generators([cycle, swap])


def alternating_group(n: int) -> FiniteGroup:
    """A_n on points 0..n-1, generated by the 3-cycles (0 1 k)."""
    generators = []
    for k in range(2, n):
        image = list(range(n))
        image[0], image[1], image[k] = 1, k, 0
        generators.append(image)
    return from_permutation_generators(generators or [list(range(n))])


def direct_product(first: FiniteGroup, second: FiniteGroup) -> FiniteGroup:
    """Direct product with element (a, b) at index a·|second| + b."""
    m = second.order
    a = np.arange(first.order * m) // m
    b = np.arange(first.order * m) % m
    mult = first.mult[a][:, a] * m + second.mult[b][:, b]
    inv = first.inv[a] * m + second.inv[b]
    return FiniteGroup(mult=mult, inv=inv)


def regular_matrix(Gamma: FiniteGroup, g: int) -> npt.NDArray[np.float64]:
    """Permutation matrix λ(g) with λ(g)δ_h = δ_{gh}."""
    n = Gamma.order
    matrix = np.zeros((n, n))
    matrix[Gamma.mult[g], np.arange(n)] = 1.0
    return matrix


def regular_representation(Gamma: FiniteGroup) -> List[npt.NDArray[np.float64]]:
    """Left-regular representation g ↦ λ(g) as dense permutation matrices."""
    return [regular_matrix(Gamma, g) for g in range(Gamma.order)]


def _block_matrices(Gamma: FiniteGroup, W: npt.NDArray[np.complex128], chunk: int = 256) -> npt.NDArray[np.complex128]:
    """Compress the left-regular representation to the column span of W: W† λ(g) W for every g."""
    n, k = W.shape
    shifts = Gamma.mult[Gamma.inv]  # shifts[g, x] = g⁻¹x, so (λ(g)W)[x] = W[g⁻¹x]
    blocks = np.empty((n, k, k), dtype=np.complex128)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        blocks[start:stop] = np.einsum("xa,gxb->gab", W.conj(), W[shifts[start:stop]])
    return blocks


def _unitary_part(matrices: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    u, _, vh = np.linalg.svd(matrices)
    return u @ vh


def _irrep_order(rep: Irrep) -> Tuple[bool, int, Tuple[float, ...]]:
    character = np.round(rep.character, 6) + 0.0
    return (not rep.is_trivial(), rep.dimension, (*character.real.tolist(), *character.imag.tolist()))


def _split_regular(Gamma: FiniteGroup, rng: np.random.Generator, tol: float) -> List[Irrep]:
    n = Gamma.order
    coefficients = rng.normal(size=n) + 1j * rng.normal(size=n)
    coefficients = (coefficients + coefficients[Gamma.inv].conj()) / 2
    # Σ_g c_g ρ(g) for the right-regular ρ, which commutes with every λ(g).
    commutant = coefficients[Gamma.mult[Gamma.inv]]
    eigenvalues, eigenvectors = np.linalg.eigh(commutant)
    scale = max(1.0, float(np.abs(eigenvalues).max()))
    boundaries = np.nonzero(np.diff(eigenvalues) > 1e-6 * scale)[0] + 1
    clusters = np.split(np.arange(n), boundaries)

    found: List[Irrep] = []
    characters: List[npt.NDArray[np.complex128]] = []
    multiplicity: List[int] = []
    for cluster in clusters:
        W = eigenvectors[:, cluster]
        blocks = _block_matrices(Gamma, W)
        character = np.trace(blocks, axis1=1, axis2=2)
        norm = float(np.sum(np.abs(character) ** 2).real) / n
        if abs(norm - 1) > 1e-6:
            raise SplitFailed(f"eigenspace of dimension {len(cluster)} is not irreducible (norm {norm:.4f})")
        overlaps = [abs(np.vdot(known, character)) / n for known in characters]
        match = next((i for i, overlap in enumerate(overlaps) if overlap > 0.5), None)
        if match is not None:
            multiplicity[match] += 1
            continue
        matrices = _unitary_part(blocks)
        rep = Irrep(matrices=matrices)
        if rep.homomorphism_defect(Gamma) > max(tol, 1e-8):
            raise SplitFailed(f"extracted block of dimension {len(cluster)} is not a homomorphism")
        found.append(rep)
        characters.append(rep.character)
        multiplicity.append(1)

    if sum(rep.dimension**2 for rep in found) != n:
        raise SplitFailed("dimensions of the extracted irreducibles do not square-sum to the group order")
    if any(count != rep.dimension for rep, count in zip(found, multiplicity)):
        raise SplitFailed("regular representation multiplicities do not match dimensions")
    return sorted(found, key=_irrep_order)


def irreps(Gamma: FiniteGroup, seed: int = settings.DEFAULT_SEED, tol: float = 1e-8) -> List[Irrep]:
    """All irreducible unitary representations up to equivalence.

    A random Hermitian element of the commutant of the left-regular representation is
    diagonalized; its eigenspaces are λ-invariant and irreducible for a generic choice. Each
    class is kept once, identified by its character.

    Args:
        Gamma: Group of order at most MAX_GROUP_ORDER.
        seed: Seed of the random commutant element.
        tol: Homomorphism tolerance for each returned representation.

    Returns:
        Pairwise inequivalent irreducibles, trivial first, then by increasing dimension.

    Raises:
        SplitFailed: If IRREP_MAX_RETRIES reseeded attempts all fail.
    """
    if Gamma.order > settings.MAX_GROUP_ORDER:
        raise ClosureTooLarge(f"group order {Gamma.order} exceeds {settings.MAX_GROUP_ORDER}")
    last_error: Optional[SplitFailed] = None
    for attempt in range(settings.IRREP_MAX_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        try:
            result = _split_regular(Gamma, rng, tol)
        except SplitFailed as exc:
            logging.warning(f"Irrep extraction attempt {attempt + 1} failed: {exc}")
            last_error = exc
            continue
        logging.info(f"Extracted {len(result)} irreducibles of dimensions {[rep.dimension for rep in result]}")
        return result
    raise SplitFailed(f"irrep extraction failed after {settings.IRREP_MAX_RETRIES} attempts: {last_error}")


def character_inner_product(first: npt.ArrayLike, second: npt.ArrayLike) -> complex:
    """Normalized group-average inner product ⟨χ, χ'⟩ = (1/|G|) Σ conj(χ(g)) χ'(g)."""
    a = np.asarray(first)
    return complex(np.vdot(a, np.asarray(second)) / a.shape[0])


def check_symmetric(Gamma: FiniteGroup, S: Iterable[int]) -> List[int]:
    """Return S as a sorted list after checking S = S⁻¹."""
    elements = sorted(set(int(s) for s in S))
    if set(int(Gamma.inv[s]) for s in elements) != set(elements):
        raise NotSymmetric(f"set {elements} is not closed under inverses")
    return elements


def kazhdan_lower_bound(Gamma: FiniteGroup, S: Iterable[int], irreps: Sequence[Irrep]) -> float:
    """Kazhdan constant certified by averaging over the generating set.

    For every nontrivial irrep π the mean M_π = (1/|S|)Σ π(s) satisfies, for unit ξ,
    max_s ‖π(s)ξ − ξ‖² ≥ 2(1 − ⟨ξ, Re M_π ξ⟩), so (S, ε) is a Kazhdan pair with
    ε = min_π √(2(1 − λ_max(Re M_π))).

    Raises:
        NotSymmetric: If S is not closed under inverses.
        NotGenerating: If some nontrivial M_π has eigenvalue 1.
    """
    elements = check_symmetric(Gamma, S)
    eps = np.inf
    for rep in irreps:
        if rep.is_trivial():
            continue
        mean = rep.matrices[elements].mean(axis=0)
        top = float(hermitian_eigvals((mean + mean.conj().T) / 2, 1e-8)[-1])
        if top >= 1 - 1e-9:
            raise NotGenerating(f"set {elements} fixes a vector of a {rep.dimension}-dimensional irreducible")
        eps = min(eps, float(np.sqrt(2 * (1 - top))))
    return float(eps) if np.isfinite(eps) else 2.0


def is_subgroup(Gamma: FiniteGroup, H: Iterable[int]) -> bool:
    elements = np.asarray(sorted(set(int(h) for h in H)), dtype=np.int64)
    if elements.size == 0 or elements[0] != 0:
        return False
    closed = np.isin(Gamma.mult[np.ix_(elements, elements)], elements).all()
    return bool(closed and np.isin(Gamma.inv[elements], elements).all())


def cosets(Gamma: FiniteGroup, H: Iterable[int]) -> List[List[int]]:
    """Left cosets gH in order of their smallest element.

    Raises:
        NotASubgroup: If H is not closed under products and inverses.
    """
    subgroup = sorted(set(int(h) for h in H))
    if not is_subgroup(Gamma, subgroup):
        raise NotASubgroup(f"{subgroup} is not a subgroup")
    assigned = np.full(Gamma.order, -1, dtype=np.int64)
    partition: List[List[int]] = []
    for g in range(Gamma.order):
        if assigned[g] >= 0:
            continue
        coset = sorted(int(x) for x in Gamma.mult[g, subgroup])
        assigned[coset] = len(partition)
        partition.append(coset)
    return partition


def coset_labels(Gamma: FiniteGroup, H: Iterable[int]) -> Tuple[List[List[int]], IntArray]:
    """Cosets together with the coset index of every element."""
    partition = cosets(Gamma, H)
    labels = np.empty(Gamma.order, dtype=np.int64)
    for index, coset in enumerate(partition):
        labels[coset] = index
    return partition, labels


def generated_subgroup(Gamma: FiniteGroup, generators: Iterable[int]) -> List[int]:
    members = {0}
    frontier = [0]
    gens = [int(g) for g in generators]
    while frontier:
        fresh = []
        for x in frontier:
            for g in gens:
                y = int(Gamma.mult[x, g])
                if y not in members:
                    members.add(y)
                    fresh.append(y)
        frontier = fresh
    return sorted(members)


def subgroups(Gamma: FiniteGroup, max_generators: int = 2) -> List[List[int]]:
    """Subgroups generated by at most `max_generators` elements, smallest first."""
    found = {frozenset([0])}
    layer = {frozenset([0])}
    for _ in range(max_generators):
        next_layer = set()
        for subgroup in layer:
            for g in range(Gamma.order):
                if g in subgroup:
                    continue
                closure = frozenset(generated_subgroup(Gamma, [*subgroup, g]))
                if closure not in found:
                    found.add(closure)
                    next_layer.add(closure)
        layer = next_layer
    return sorted((sorted(s) for s in found), key=lambda s: (len(s), s))


def conjugacy_classes(Gamma: FiniteGroup) -> List[List[int]]:
    assigned = np.zeros(Gamma.order, dtype=bool)
    classes = []
    for g in range(Gamma.order):
        if assigned[g]:
            continue
        members = sorted(set(int(x) for x in Gamma.mult[Gamma.mult[:, g], Gamma.inv]))
        assigned[members] = True
        classes.append(members)
    return classes


def subgroup_group(Gamma: FiniteGroup, H: Iterable[int]) -> Tuple[FiniteGroup, IntArray]:
    """H as a group in its own right; `elements[i]` is the ambient index of its element i."""
    elements = np.asarray(sorted(set(int(h) for h in H)), dtype=np.int64)
    if not is_subgroup(Gamma, elements):
        raise NotASubgroup(f"{elements.tolist()} is not a subgroup")
    position = np.full(Gamma.order, -1, dtype=np.int64)
    position[elements] = np.arange(elements.size)
    mult = position[Gamma.mult[np.ix_(elements, elements)]]
    inv = position[Gamma.inv[elements]]
    permutations = Gamma.permutations[elements] if Gamma.permutations is not None else None
    return FiniteGroup(mult=mult, inv=inv, permutations=permutations), elements


def transpositions(Gamma: FiniteGroup) -> List[int]:
    """Elements of a permutation group that swap exactly two points."""
    if Gamma.permutations is None:
        raise InputError("transpositions need a permutation group")
    moved = np.count_nonzero(Gamma.permutations != np.arange(Gamma.permutations.shape[1]), axis=1)
    return [int(g) for g in np.nonzero(moved == 2)[0]]


def symmetric_closure(Gamma: FiniteGroup, S: Iterable[int]) -> List[int]:
    elements = {int(s) for s in S}
    return sorted(elements | {int(Gamma.inv[s]) for s in elements})
