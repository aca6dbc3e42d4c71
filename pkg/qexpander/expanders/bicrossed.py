"""Matched pairs from exact factorizations and the channels of their bicrossed products.

For H = ΓG with Γ ∩ G = {e}, every product γg factors uniquely as α_γ(g)·β_g(γ) with
α_γ(g) ∈ G and β_g(γ) ∈ Γ. α is a left action of Γ on G, β a right action of G on Γ.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .channels import Channel, compose, mixed_unitary, rep_channel, second_singular_value
from .exceptions import NotAPVM, NotAState, NotExactFactorization
from .groups import FiniteGroup, is_subgroup
from .numerics import ComplexMatrix, as_matrix, hermitian_eigvals, null_space

settings = ExpanderSettings()

IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class MatchedPair:
    """Matched pair (Γ, G) inside an ambient group.

    `gamma_part` and `g_part` list ambient indices. `alpha[i, j]` is the position in `g_part`
    of α_γ(g) for γ = gamma_part[i], g = g_part[j]; `beta[j, i]` is the position in `gamma_part`
    of β_g(γ).
    """

    ambient: FiniteGroup
    gamma_part: Tuple[int, ...]
    g_part: Tuple[int, ...]
    alpha: IntArray
    beta: IntArray

    def gamma_position(self, gamma: int) -> int:
        return self.gamma_part.index(int(gamma))

    def alpha_of(self, gamma: int, g: int) -> int:
        """α_γ(g) as an ambient index."""
        return self.g_part[self.alpha[self.gamma_position(gamma), self.g_part.index(int(g))]]

    def beta_of(self, g: int, gamma: int) -> int:
        """β_g(γ) as an ambient index."""
        return self.gamma_part[self.beta[self.g_part.index(int(g)), self.gamma_position(gamma)]]

    def is_trivial_beta(self) -> bool:
        return bool(np.all(self.beta == np.arange(len(self.gamma_part))[None, :]))


@dataclass(frozen=True, eq=False)
class MagicUnitary:
    """entries[r, s] is the indicator over positions of G of A_{r,s} = {g : β_g(r) = s}."""

    orbit: Tuple[int, ...]
    entries: npt.NDArray[np.bool_]

    @property
    def size(self) -> int:
        return len(self.orbit)

    def projection(self, r: int, s: int) -> npt.NDArray[np.float64]:
        """ω(v_rs) as a diagonal projection on ℓ²(G)."""
        return np.diag(self.entries[r, s].astype(float))

    def row_pvm(self, r: int) -> List[npt.NDArray[np.float64]]:
        return [self.projection(r, s) for s in range(self.size)]


@dataclass(frozen=True, eq=False)
class CovariantRepresentation:
    """π(u_γ)δ_g = δ_{α_γ(g)} and π(ω(f)) = diag(f) on ℓ²(G)."""

    pair: MatchedPair

    def u(self, gamma: int) -> npt.NDArray[np.float64]:
        i = self.pair.gamma_position(gamma)
        n = len(self.pair.g_part)
        matrix = np.zeros((n, n))
        matrix[self.pair.alpha[i], np.arange(n)] = 1.0
        return matrix

    def omega(self, f: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        return np.diag(np.asarray(f, dtype=np.complex128))

    def covariance_defect(self) -> float:
        """max over γ, g of ‖π(u_γ)π(ω(δ_g))π(u_γ)* − π(ω(δ_g∘α_{γ⁻¹}))‖."""
        n = len(self.pair.g_part)
        worst = 0.0
        for i, gamma in enumerate(self.pair.gamma_part):
            U = self.u(gamma)
            for j in range(n):
                lhs = U @ self.omega(np.eye(n)[j]) @ U.T
                moved = np.zeros(n)
                moved[self.pair.alpha[i, j]] = 1.0
                worst = max(worst, float(np.abs(lhs - self.omega(moved)).max()))
        return worst


def _factor(H: FiniteGroup, gamma_part: Sequence[int], g_part: Sequence[int]) -> Tuple[IntArray, IntArray]:
    """Position of the G factor and of the Γ factor of every ambient element h = g·γ."""
    g_of = np.full(H.order, -1, dtype=np.int64)
    gamma_of = np.full(H.order, -1, dtype=np.int64)
    products = H.mult[np.ix_(g_part, gamma_part)]
    g_of[products] = np.arange(len(g_part))[:, None]
    gamma_of[products] = np.arange(len(gamma_part))[None, :]
    return g_of, gamma_of


def _check_laws(mp: MatchedPair) -> None:
    alpha, beta = mp.alpha, mp.beta
    n_gamma, n_g = len(mp.gamma_part), len(mp.g_part)
    position = np.full(mp.ambient.order, -1, dtype=np.int64)
    position[list(mp.gamma_part)] = np.arange(n_gamma)
    gamma_mult = position[mp.ambient.mult[np.ix_(mp.gamma_part, mp.gamma_part)]]
    position[list(mp.g_part)] = np.arange(n_g)
    g_mult = position[mp.ambient.mult[np.ix_(mp.g_part, mp.g_part)]]

    if not (np.array_equal(alpha[0], np.arange(n_g)) and np.array_equal(beta[0], np.arange(n_gamma))):
        raise NotExactFactorization("identity does not act trivially")

    # α_{γγ'} = α_γ∘α_γ', indexed [γ, γ', g]
    if not np.array_equal(alpha[gamma_mult], alpha[np.arange(n_gamma)[:, None, None], alpha[None, :, :]]):
        raise NotExactFactorization("alpha is not a left action")
    # β_{gh} = β_h∘β_g, indexed [g, h, γ]
    if not np.array_equal(beta[g_mult], beta[np.arange(n_g)[None, :, None], beta[:, None, :]]):
        raise NotExactFactorization("beta is not a right action")

    gamma_i = np.arange(n_gamma)[:, None, None]
    g_j, g_k = np.arange(n_g)[None, :, None], np.arange(n_g)[None, None, :]
    # α_γ(gh) = α_γ(g)·α_{β_g(γ)}(h), indexed [γ, g, h]
    if not np.array_equal(alpha[gamma_i, g_mult[g_j, g_k]], g_mult[alpha[gamma_i, g_j], alpha[beta[g_j, gamma_i], g_k]]):
        raise NotExactFactorization("alpha violates the matched pair compatibility")
    g_j = np.arange(n_g)[:, None, None]
    gamma_i, gamma_k = np.arange(n_gamma)[None, :, None], np.arange(n_gamma)[None, None, :]
    # β_g(γγ') = β_{α_γ'(g)}(γ)·β_g(γ'), indexed [g, γ, γ']
    if not np.array_equal(beta[g_j, gamma_mult[gamma_i, gamma_k]], gamma_mult[beta[alpha[gamma_k, g_j], gamma_i], beta[g_j, gamma_k]]):
        raise NotExactFactorization("beta violates the matched pair compatibility")


def from_factorization(H: FiniteGroup, Gamma: Sequence[int], G: Sequence[int]) -> MatchedPair:
    """Matched pair of an exact factorization H = ΓG.

    Args:
        H: Ambient group.
        Gamma: Ambient indices of Γ.
        G: Ambient indices of G.

    Returns:
        The pair with α, β read off from γg = α_γ(g)·β_g(γ), all action and compatibility
        identities checked exhaustively.

    Raises:
        NotExactFactorization: If Γ, G are not subgroups, intersect nontrivially or |Γ||G| ≠ |H|.
    """
    gamma_part = tuple(sorted(set(int(x) for x in Gamma)))
    g_part = tuple(sorted(set(int(x) for x in G)))
    if not (is_subgroup(H, gamma_part) and is_subgroup(H, g_part)):
        raise NotExactFactorization("both factors must be subgroups")
    if set(gamma_part) & set(g_part) != {0}:
        raise NotExactFactorization("factors intersect nontrivially")
    if len(gamma_part) * len(g_part) != H.order:
        raise NotExactFactorization(f"|Γ|·|G| = {len(gamma_part) * len(g_part)} differs from |H| = {H.order}")

    g_of, gamma_of = _factor(H, gamma_part, g_part)
    products = H.mult[np.ix_(gamma_part, g_part)]  # γg indexed [γ, g]
    alpha = g_of[products]
    beta = gamma_of[products].T
    mp = MatchedPair(ambient=H, gamma_part=gamma_part, g_part=g_part, alpha=alpha, beta=beta)
    _check_laws(mp)
    logging.info(f"Matched pair with |Γ| = {len(gamma_part)}, |G| = {len(g_part)}")
    return mp


def beta_orbit(mp: MatchedPair, gamma: int) -> Tuple[int, ...]:
    """γ·G = {β_g(γ) : g ∈ G} as sorted ambient indices."""
    i = mp.gamma_position(gamma)
    return tuple(sorted({mp.gamma_part[k] for k in mp.beta[:, i]}))


def orbits(mp: MatchedPair) -> List[Tuple[int, ...]]:
    found: Dict[Tuple[int, ...], None] = {}
    for gamma in mp.gamma_part:
        found.setdefault(beta_orbit(mp, gamma), None)
    return list(found)


def magic_unitary(mp: MatchedPair, orbit: Sequence[int]) -> MagicUnitary:
    """A_{r,s} = {g ∈ G : β_g(r) = s} over a full β-orbit.

    Raises:
        NotAPVM: If some row or column fails to partition G.
    """
    members = tuple(orbit)
    positions = [mp.gamma_position(r) for r in members]
    entries = np.zeros((len(members), len(members), len(mp.g_part)), dtype=bool)
    for a, r in enumerate(positions):
        for b, s in enumerate(positions):
            entries[a, b] = mp.beta[:, r] == s
    if not (np.all(entries.sum(axis=1) == 1) and np.all(entries.sum(axis=0) == 1)):
        raise NotAPVM(f"orbit {list(members)} does not give a magic unitary")
    return MagicUnitary(orbit=members, entries=entries)


def covariant_rep(mp: MatchedPair) -> CovariantRepresentation:
    return CovariantRepresentation(pair=mp)


def rep_V(mp: MatchedPair, orbit: Sequence[int]) -> ComplexMatrix:
    """V = Σ_{r,s} e_rs ⊗ π(u_r)π(ω(v_rs)) on C^{|orbit|} ⊗ ℓ²(G)."""
    magic = magic_unitary(mp, orbit)
    pi = covariant_rep(mp)
    n, k = len(mp.g_part), magic.size
    V = np.zeros((k * n, k * n), dtype=np.complex128)
    for a, r in enumerate(magic.orbit):
        U = pi.u(r)
        for b in range(k):
            V[a * n : (a + 1) * n, b * n : (b + 1) * n] = U @ magic.projection(a, b)
    return V


def check_state(phi: npt.ArrayLike, size: int, tol: float = 1e-10) -> ComplexMatrix:
    """Raise NotAState unless phi is a density matrix of the given size."""
    matrix = as_matrix(phi)
    if matrix.shape != (size, size):
        raise NotAState(f"state must be {size}x{size}, got {matrix.shape}")
    if np.abs(matrix - matrix.conj().T).max() > tol:
        raise NotAState("state is not Hermitian")
    if hermitian_eigvals(matrix, 1e-8)[0] < -tol:
        raise NotAState("state is not positive semidefinite")
    if abs(np.trace(matrix) - 1) > tol:
        raise NotAState(f"state has trace {np.trace(matrix).real:.12f}")
    return matrix


def bicrossed_channel(mp: MatchedPair, orbit: Sequence[int], phi: Optional[npt.ArrayLike] = None) -> Channel:
    """Φ(ρ) = (φ ⊗ id)(V (I ⊗ ρ) V*) for the representation V of the orbit.

    Args:
        mp: Matched pair.
        orbit: A full β-orbit.
        phi: Density matrix on C^{|orbit|}; the normalized trace when omitted.

    Raises:
        NotAState: If phi is not a state.
    """
    k = len(orbit)
    state = np.eye(k) / k if phi is None else check_state(phi, k)
    return rep_channel([(tuple(orbit), rep_V(mp, orbit))], [state], faithful=False)


def pvm_phase_unitary(pvm: Sequence[npt.ArrayLike], tol: float = 1e-10) -> Tuple[ComplexMatrix, float]:
    """U = Σ_k e^{2πik/n} p_k and the deviation of (1/n)Σ_k U^k ρ U^{-k} from Σ_k p_k ρ p_k.

    The deviation is the largest entry difference of the two superoperators, i.e. the worst
    case over the matrix units of M_N.

    Raises:
        NotAPVM: If the projections are not orthogonal or do not sum to the identity.
    """
    projections = [as_matrix(p) for p in pvm]
    n = len(projections)
    N = projections[0].shape[0]
    for a, p in enumerate(projections):
        if np.abs(p - p.conj().T).max() > tol or np.abs(p @ p - p).max() > tol:
            raise NotAPVM(f"element {a} is not an orthogonal projection")
        for q in projections[a + 1 :]:
            if np.abs(p @ q).max() > tol:
                raise NotAPVM("projections are not pairwise orthogonal")
    if np.abs(sum(projections) - np.eye(N)).max() > tol:
        raise NotAPVM("projections do not sum to the identity")

    phases = np.exp(2j * np.pi * np.arange(1, n + 1) / n)
    U = sum(phase * p for phase, p in zip(phases, projections))
    powers = [np.linalg.matrix_power(U, k) for k in range(1, n + 1)]
    averaged = sum(np.kron(P, P.conj()) for P in powers) / n
    pinching = sum(np.kron(p, p.conj()) for p in projections)
    return U, float(np.abs(averaged - pinching).max())


def mixed_unitary_channel(mp: MatchedPair, orbit: Sequence[int]) -> Channel:
    """The tracial bicrossed channel rebuilt as Σ_r Σ_j (1/(k·n_r)) Ad(π(u_r)U_r^j).

    U_r is the phase unitary of row r of the magic unitary, restricted to its nonzero entries.
    """
    magic = magic_unitary(mp, orbit)
    pi = covariant_rep(mp)
    unitaries, weights = [], []
    for a, r in enumerate(magic.orbit):
        row = [p for p in magic.row_pvm(a) if p.any()]
        U, deviation = pvm_phase_unitary(row)
        if deviation > 1e-12:
            logging.warning(f"Phase unitary of row {a} reproduces the pinching only to {deviation:.2e}")
        for j in range(1, len(row) + 1):
            unitaries.append(pi.u(r) @ np.linalg.matrix_power(U, j))
            weights.append(1 / (magic.size * len(row)))
    return mixed_unitary(unitaries, weights)


def conjugation_channel(mp: MatchedPair, orbit: Sequence[int]) -> Channel:
    """ρ ↦ (1/|orbit|) Σ_r π(u_r) ρ π(u_r)*."""
    pi = covariant_rep(mp)
    return mixed_unitary([pi.u(r) for r in orbit])


def intertwiner_dimension(mp: MatchedPair, orbit: Sequence[int]) -> int:
    """dim{T ∈ M_k : (T ⊗ I)V = V(T ⊗ I)}; 1 when V is irreducible under π."""
    V = rep_V(mp, orbit)
    k = len(orbit)
    n = V.shape[0] // k
    constraints = []
    for a in range(k):
        for b in range(k):
            T = np.zeros((k, k))
            T[a, b] = 1.0
            lifted = np.kron(T, np.eye(n))
            constraints.append((lifted @ V - V @ lifted).reshape(-1))
    return int(null_space(np.stack(constraints, axis=1), 1e-9).shape[1])


def composition_contraction(mp: MatchedPair, orbit: Sequence[int]) -> Tuple[float, float, float]:
    """Second singular values of the tracial bicrossed channel Φ, the conjugation channel C and Φ∘C.

    Both factors are unital and trace preserving, so the last value is at most the product of
    the first two.
    """
    bicrossed = bicrossed_channel(mp, orbit)
    conjugation = conjugation_channel(mp, orbit)
    return (
        second_singular_value(bicrossed),
        second_singular_value(conjugation),
        second_singular_value(compose(bicrossed, conjugation)),
    )
