"""Quantum bistochastic maps in Kraus form and their expansion certificates."""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from ..settings import ExpanderSettings
from .exceptions import (
    CertificateViolated,
    InputError,
    InvalidGraph,
    NotConnected,
    NotFaithfulState,
    NotRegular,
    NotUndirected,
    NotUnitaryBlock,
    TrivialRep,
)
from .graphs import CycleCoverDecomposition, Graph, cayley_graph, spectral_data
from .groups import FiniteGroup, Irrep, check_symmetric
from .numerics import (
    ComplexMatrix,
    as_matrix,
    hermitian_eig,
    hermitian_eigvals,
    null_space,
    rank_eps,
    subspace_distance,
    unitarity_defect,
)
from .reports import ChannelValidation, GapCertificate

settings = ExpanderSettings()

KrausArray = npt.NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive map ρ ↦ Σ K ρ K† on B(C^dim); `kraus` has shape (count, dim, dim)."""

    kraus: KrausArray

    def __post_init__(self) -> None:
        if self.kraus.ndim != 3 or self.kraus.shape[1] != self.kraus.shape[2] or self.kraus.shape[0] == 0:
            raise InputError(f"Kraus operators must be a nonempty stack of square matrices, got shape {self.kraus.shape}")

    @classmethod
    def from_kraus(cls, operators: Iterable[npt.ArrayLike]) -> "Channel":
        return cls(kraus=np.stack([as_matrix(op) for op in operators]))

    @property
    def dim(self) -> int:
        return int(self.kraus.shape[1])

    @property
    def kraus_count(self) -> int:
        return int(self.kraus.shape[0])

    def __call__(self, rho: npt.ArrayLike) -> ComplexMatrix:
        return np.einsum("kab,bc,kdc->ad", self.kraus, as_matrix(rho), self.kraus.conj())

    def tp_defect(self) -> float:
        total = np.einsum("kba,kbc->ac", self.kraus.conj(), self.kraus)
        return float(np.abs(total - np.eye(self.dim)).max())

    def unital_defect(self) -> float:
        total = np.einsum("kab,kcb->ac", self.kraus, self.kraus.conj())
        return float(np.abs(total - np.eye(self.dim)).max())


@dataclass(frozen=True, eq=False)
class ExpansionEstimate:
    lower_certificate: float
    upper_estimate: float
    witness_projector: ComplexMatrix
    trials_used: int


def transfer_matrix(Phi: Channel) -> ComplexMatrix:
    """Σ K ⊗ conj(K), the action of Φ on row-major vectorized matrices."""
    n = Phi.dim
    return np.einsum("kab,kcd->acbd", Phi.kraus, Phi.kraus.conj()).reshape(n * n, n * n)


def choi(Phi: Channel) -> ComplexMatrix:
    """J = Σ_ij e_ij ⊗ Φ(e_ij)."""
    n = Phi.dim
    vectors = Phi.kraus.transpose(0, 2, 1).reshape(Phi.kraus_count, n * n)  # entry (i, a) holds K[a, i]
    return vectors.T @ vectors.conj()


def degree(Phi: Channel) -> int:
    """Kraus rank of Φ, i.e. the rank of its Choi matrix."""
    return rank_eps(choi(Phi), settings.RANK_TOL)


def minimal_kraus(Phi: Channel) -> Channel:
    """Kraus family of minimal size from the Choi eigendecomposition."""
    n = Phi.dim
    eigenvalues, eigenvectors = hermitian_eig(choi(Phi), 1e-8)
    keep = eigenvalues > settings.KRAUS_DISCARD_TOL
    operators = [np.sqrt(value) * eigenvectors[:, i].reshape(n, n).T for i, value in zip(np.nonzero(keep)[0], eigenvalues[keep])]
    return Channel.from_kraus(operators[::-1])


def is_undirected(Phi: Channel, tol: float = settings.DEFAULT_TOL) -> bool:
    """Φ is self-adjoint for the Hilbert-Schmidt inner product."""
    transfer = transfer_matrix(Phi)
    return bool(np.abs(transfer - transfer.conj().T).max() <= tol)


def fixed_point_space(Phi: Channel) -> KrausArray:
    """Hilbert-Schmidt orthonormal basis of {X : Φ(X) = X}, shape (count, dim, dim)."""
    n = Phi.dim
    basis = null_space(transfer_matrix(Phi) - np.eye(n * n), settings.FIXED_POINT_GAP)
    return basis.T.reshape(-1, n, n)


def kraus_commutant(Phi: Channel) -> KrausArray:
    """Orthonormal basis of the matrices commuting with every Kraus operator."""
    n = Phi.dim
    identity = np.eye(n)
    rows = [np.kron(K, identity) - np.kron(identity, K.T) for K in Phi.kraus]
    basis = null_space(np.vstack(rows), settings.FIXED_POINT_GAP)
    return basis.T.reshape(-1, n, n)


def fixed_space_matches_commutant(Phi: Channel) -> float:
    """Largest principal angle between the fixed point space and the Kraus commutant."""
    n = Phi.dim
    fixed = fixed_point_space(Phi).reshape(-1, n * n).T
    commutant = kraus_commutant(Phi).reshape(-1, n * n).T
    return subspace_distance(fixed, commutant)


def is_connected(Phi: Channel) -> bool:
    return fixed_point_space(Phi).shape[0] == 1


def validate(Phi: Channel, tol: float = settings.DEFAULT_TOL) -> ChannelValidation:
    """Report complete positivity, bistochasticity, undirectedness and connectedness."""
    choi_eigenvalues = hermitian_eigvals(choi(Phi), 1e-8)
    fixed_dim = fixed_point_space(Phi).shape[0]
    return ChannelValidation(
        dim=Phi.dim,
        kraus_count=Phi.kraus_count,
        cp=bool(choi_eigenvalues[0] >= -tol),
        tp=Phi.tp_defect() <= tol,
        unital=Phi.unital_defect() <= tol,
        undirected=is_undirected(Phi, tol),
        connected=fixed_dim == 1,
        fixed_space_dim=fixed_dim,
    )


def transfer_spectrum(Phi: Channel) -> npt.NDArray[np.float64]:
    """Descending spectrum of the Hermitian transfer matrix.

    Raises:
        NotUndirected: If the transfer matrix is not Hermitian.
    """
    transfer = transfer_matrix(Phi)
    if np.abs(transfer - transfer.conj().T).max() > settings.DEFAULT_TOL:
        raise NotUndirected("transfer matrix is not Hermitian")
    return hermitian_eigvals(transfer, 1e-8)[::-1]


def second_eigenvalue(Phi: Channel) -> Optional[float]:
    """Second-largest transfer eigenvalue counted with multiplicity; None on a 1-dimensional space."""
    spectrum = transfer_spectrum(Phi)
    return float(spectrum[1]) if spectrum.size > 1 else None


def lambda2(Phi: Channel) -> Optional[float]:
    """λ₂ of an undirected connected channel; None when dim = 1.

    Raises:
        NotUndirected: If Φ is not self-adjoint.
        NotConnected: If the fixed point space has dimension above 1.
    """
    spectrum = transfer_spectrum(Phi)
    if not is_connected(Phi):
        raise NotConnected("channel has a fixed point space of dimension above 1")
    return float(spectrum[1]) if spectrum.size > 1 else None


def second_singular_value(Phi: Channel) -> float:
    """Norm of the transfer matrix on the traceless subspace, for unital trace preserving Φ."""
    n = Phi.dim
    if n == 1:
        return 0.0
    unit = np.eye(n).reshape(-1) / np.sqrt(n)
    complement = np.eye(n * n) - np.outer(unit, unit)
    return float(np.linalg.norm(complement @ transfer_matrix(Phi) @ complement, 2))


def diagonal_restriction(Phi: Channel) -> npt.NDArray[np.float64]:
    """Matrix D with Φ(diag x) having diagonal D x."""
    n = Phi.dim
    diagonal = np.arange(n) * (n + 1)
    return transfer_matrix(Phi)[np.ix_(diagonal, diagonal)].real


def _frame_ratio(kraus: KrausArray, frame: ComplexMatrix) -> float:
    """Tr[(I−Π)Φ(Π)] / min(TrΠ, Tr(I−Π)) for Π the projector onto the columns of `frame`."""
    n, r = frame.shape
    compressed = np.einsum("ai,kab,bj->kij", frame.conj(), kraus, frame)
    retained = float(np.sum(np.abs(compressed) ** 2))
    return (r - retained) / min(r, n - r)


def projector_ratio(Phi: Channel, projector: npt.ArrayLike) -> float:
    """Edge expansion ratio of a single projector."""
    P = as_matrix(projector)
    rank = round(float(np.trace(P).real))
    if rank in (0, Phi.dim):
        raise InputError("projector must be proper and nonzero")
    image = Phi(P)
    return float((rank - np.trace(P @ image).real) / min(rank, Phi.dim - rank))


def _sweep_frames(matrix: ComplexMatrix) -> List[ComplexMatrix]:
    """Frames spanned by the top-k eigenvectors of the Hermitian parts of `matrix`."""
    frames = []
    for part in ((matrix + matrix.conj().T) / 2, (matrix - matrix.conj().T) / 2j):
        if np.abs(part).max() <= 1e-12:
            continue
        _, vectors = hermitian_eig(part, 1e-8)
        vectors = vectors[:, ::-1]
        frames.extend(vectors[:, :k] for k in range(1, matrix.shape[0]))
    return frames


def _givens_descent(kraus: KrausArray, unitary: ComplexMatrix, rank: int, rng: np.random.Generator, steps: int) -> Tuple[float, ComplexMatrix]:
    n = unitary.shape[0]
    frame_unitary = unitary.copy()
    best = _frame_ratio(kraus, frame_unitary[:, :rank])
    angle = np.pi / 4
    for _ in range(steps):
        p = int(rng.integers(rank))
        q = int(rng.integers(rank, n))
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        improved = False
        for theta in (angle, -angle):
            c, s = np.cos(theta), np.sin(theta)
            trial = frame_unitary.copy()
            trial[:, p] = c * frame_unitary[:, p] - s * phase.conjugate() * frame_unitary[:, q]
            trial[:, q] = s * phase * frame_unitary[:, p] + c * frame_unitary[:, q]
            value = _frame_ratio(kraus, trial[:, :rank])
            if value < best:
                best, frame_unitary, improved = value, trial, True
                break
        if not improved:
            angle *= 0.7
    return best, frame_unitary[:, :rank]


def estimate_hq(Phi: Channel, budget: int = settings.HQ_BUDGET, seed: int = settings.DEFAULT_SEED) -> ExpansionEstimate:
    """Bracket the quantum edge expansion h_Q(Φ).

    The lower certificate is ½(1−λ₂) for connected channels and 0 otherwise. The upper estimate
    is the best ratio over: threshold sweeps of the Hermitian parts of the leading transfer
    eigenvectors (and of the fixed points when Φ is disconnected), every diagonal subset
    projector for small dimensions, and `budget` Haar-random projectors of cycling rank refined
    by Givens-rotation descent.

    Args:
        Phi: Undirected channel on a space of dimension at least 2.
        budget: Number of random restarts.
        seed: Restart i draws from the stream default_rng([seed, i]).

    Returns:
        The bracket together with the best projector found.
    """
    n = Phi.dim
    if n < 2:
        raise InputError("quantum edge expansion needs dimension at least 2")
    spectrum = transfer_spectrum(Phi)
    connected = is_connected(Phi)
    lower = (1 - float(spectrum[1])) / 2 if connected else 0.0

    best_ratio, best_frame = np.inf, None
    trials = 0

    def consider(frame: ComplexMatrix) -> None:
        nonlocal best_ratio, best_frame, trials
        trials += 1
        value = _frame_ratio(Phi.kraus, frame)
        if value < best_ratio:
            best_ratio, best_frame = value, frame

    consider(np.eye(n, dtype=np.complex128)[:, :1])
    _, vectors = hermitian_eig(transfer_matrix(Phi), 1e-8)
    sources = [vectors[:, -i].reshape(n, n) for i in range(1, min(n * n, 6) + 1)]
    if not connected:
        sources.extend(fixed_point_space(Phi))
    for source in sources:
        traceless = source - np.trace(source) / n * np.eye(n)
        for frame in _sweep_frames(traceless):
            consider(frame)

    if n <= settings.HQ_DIAGONAL_MAX_DIM:
        identity = np.eye(n, dtype=np.complex128)
        for size in range(1, n // 2 + 1):
            for subset in itertools.combinations(range(n), size):
                consider(identity[:, list(subset)])

    for restart in range(budget):
        rng = np.random.default_rng([seed, restart])
        rank = 1 + restart % (n // 2)
        start = unitary_group.rvs(n, random_state=rng)
        value, frame = _givens_descent(Phi.kraus, start, rank, rng, settings.HQ_DESCENT_STEPS)
        trials += 1
        if value < best_ratio:
            best_ratio, best_frame = value, frame

    witness = best_frame @ best_frame.conj().T
    logging.info(f"h_Q bracket [{lower:.6f}, {best_ratio:.6f}] from {trials} trials")
    return ExpansionEstimate(lower_certificate=lower, upper_estimate=float(best_ratio), witness_projector=witness, trials_used=trials)


def lift_graph(G: Graph, dec: CycleCoverDecomposition) -> Channel:
    """Φ_G(ρ) = (1/d) Σ P_i ρ P_i* for a cycle cover decomposition of a d-regular graph."""
    if dec.degree == 0:
        raise InvalidGraph("cannot lift a graph without edges")
    if not dec.is_valid_for(G):
        raise InputError("decomposition does not match the graph")
    return Channel.from_kraus(P / np.sqrt(dec.degree) for P in dec.matrices())


def canonical_graph_channel(G: Graph) -> Channel:
    """Channel with Kraus operators e_ij/√d for every ordered adjacent pair; its degree is |V|·d."""
    d = G.regular_degree()
    if not d:
        raise NotRegular("canonical graph channel needs a regular graph with edges")
    n = G.vertex_count
    operators = []
    for u, v in sorted(G.edges):
        for i, j in ((u, v), (v, u)):
            unit = np.zeros((n, n))
            unit[i, j] = 1 / np.sqrt(d)
            operators.append(unit)
    return Channel.from_kraus(operators)


def mixed_unitary(unitaries: Sequence[npt.ArrayLike], weights: Optional[Sequence[float]] = None) -> Channel:
    count = len(unitaries)
    probabilities = np.full(count, 1 / count) if weights is None else np.asarray(weights, dtype=float)
    return Channel.from_kraus(np.sqrt(p) * as_matrix(U) for p, U in zip(probabilities, unitaries))


def weyl_mixture(n: int, d: int) -> Channel:
    """Equal mixture of the first d clock-and-shift unitaries X^a Z^b, which are HS-orthogonal."""
    if not 1 <= d <= n * n:
        raise InputError(f"need 1 <= d <= {n * n}")
    shift = np.roll(np.eye(n), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    pairs = list(itertools.product(range(n), range(n)))[:d]
    return mixed_unitary([np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a, b in pairs])


def compose(Phi: Channel, Psi: Channel) -> Channel:
    """Φ∘Ψ."""
    kraus = np.einsum("iab,jbc->ijac", Phi.kraus, Psi.kraus)
    return Channel(kraus=kraus.reshape(-1, Phi.dim, Phi.dim))


def harrow_channel(pi: Irrep, S: Iterable[int], Gamma: Optional[FiniteGroup] = None, tol: float = settings.DEFAULT_TOL) -> Channel:
    """Φ(ρ) = (1/|S|) Σ_{s∈S} π(s) ρ π(s)† for a nontrivial irreducible π.

    When `Gamma` is given, S is checked for symmetry and λ₂(Φ) ≤ λ₂(C(Γ,S))/|S| is asserted.

    Raises:
        TrivialRep: If π is the trivial representation.
        CertificateViolated: If the Cayley comparison fails.
    """
    if pi.is_trivial():
        raise TrivialRep("Harrow channels need a nontrivial representation")
    elements = check_symmetric(Gamma, S) if Gamma is not None else sorted(set(int(s) for s in S))
    channel = mixed_unitary([pi(s) for s in elements])
    if Gamma is not None and channel.dim > 1:
        cayley = spectral_data(cayley_graph(Gamma, elements)).lambda2
        value = second_eigenvalue(channel)
        if value > cayley / len(elements) + tol:
            raise CertificateViolated("Harrow comparison with the Cayley graph", value, cayley / len(elements))
    return channel


def _check_state_blocks(psi: Sequence[npt.ArrayLike], tol: float, faithful: bool = True) -> List[Tuple[npt.NDArray[np.float64], ComplexMatrix]]:
    spectra = []
    total = 0.0
    for sigma in psi:
        values, vectors = hermitian_eig(as_matrix(sigma), 1e-8)
        if not faithful and values[0] >= -tol:
            values = np.clip(values, 0.0, None)
        elif values[0] <= tol:
            raise NotFaithfulState(f"state block has eigenvalue {values[0]:.3e}")
        total += float(values.sum())
        spectra.append((values, vectors))
    if abs(total - 1) > 1e-9:
        raise NotFaithfulState(f"state has trace {total:.12f}")
    return spectra


def rep_channel(
    blocks: Sequence[Tuple[object, npt.ArrayLike]],
    psi: Sequence[npt.ArrayLike],
    symmetric: bool = False,
    tol: float = 1e-8,
    faithful: bool = True,
) -> Channel:
    """Channel Ψ(ρ) = Σ_s Σ_{a,c} λ_{a,s} U^s_{ac} ρ (U^s_{ac})* of a block representation.

    Each U^s lives in B(H_s) ⊗ B(K) with H_s the first Kronecker factor, so U^s_{ac} is the
    (a, c) block of size dim K. `psi[s]` is the density block σ_s on H_s; it is diagonalized as
    σ_s = W diag(λ) W* and the Kraus operators are √λ_{a'} Σ_a conj(W[a, a']) U^s_{ac}.

    Args:
        blocks: Pairs (label, U^s).
        psi: One positive definite block per label, traces summing to 1.
        symmetric: Caller asserts ψ is antipode-invariant; a non-Hermitian transfer matrix is logged.
        tol: Unitarity tolerance.
        faithful: Require ψ faithful; otherwise Kraus operators of zero weight are dropped.

    Returns:
        The unital completely positive map; trace preserving when each U^s is bi-unitary.

    Raises:
        NotUnitaryBlock: If some U^s is not unitary.
        NotFaithfulState: If ψ is not a faithful state.
    """
    if len(blocks) != len(psi):
        raise InputError("one state block per representation block is required")
    spectra = _check_state_blocks(psi, 1e-12, faithful)
    operators = []
    target = None
    for (label, U), (values, vectors) in zip(blocks, spectra):
        U = as_matrix(U)
        size = vectors.shape[0]
        if U.shape[0] % size:
            raise InputError(f"block {label} has size {U.shape[0]}, not a multiple of {size}")
        m = U.shape[0] // size
        if target is not None and m != target:
            raise InputError(f"block {label} acts on dimension {m}, expected {target}")
        target = m
        if unitarity_defect(U) > tol:
            raise NotUnitaryBlock(f"block {label} is not unitary")
        entries = U.reshape(size, m, size, m).transpose(0, 2, 1, 3)  # entries[a, c] = U_ac
        rotated = np.einsum("ab,acij->bcij", vectors.conj(), entries) * np.sqrt(values)[:, None, None, None]
        rotated = rotated[values > settings.KRAUS_DISCARD_TOL]
        operators.extend(rotated.reshape(-1, m, m))
    channel = Channel.from_kraus(operators)
    if symmetric and not is_undirected(channel):
        logging.warning("State flagged symmetric but the transfer matrix is not Hermitian")
    return channel


def check_gap_certificate(
    Phi: Channel,
    eps: float,
    dimHE: int,
    lambda_min: Optional[float] = None,
    tol: float = settings.DEFAULT_TOL,
) -> GapCertificate:
    """Assert λ₂(Φ) ≤ 1 − λ_min·ε²/2 and ½(1−λ₂) ≥ λ_min·ε²/4.

    The tracial case is lambda_min = 1/dimHE, giving 1 − ε²/(2·dimHE) and ε²/(4·dimHE).

    Raises:
        CertificateViolated: If either inequality fails beyond `tol`.
    """
    weight = 1 / dimHE if lambda_min is None else lambda_min
    value = lambda2(Phi)
    bound = 1 - weight * eps * eps / 2
    expansion_bound = weight * eps * eps / 4
    if value is None:
        return GapCertificate(eps=eps, dim_he=dimHE, lambda_min=weight, lambda2_bound=bound, expansion_bound=expansion_bound, passed=True)
    lower = (1 - value) / 2
    if value > bound + tol:
        raise CertificateViolated("spectral gap bound", value, bound)
    if lower + tol < expansion_bound:
        raise CertificateViolated("edge expansion bound", expansion_bound, lower)
    return GapCertificate(
        lambda2=value,
        eps=eps,
        dim_he=dimHE,
        lambda_min=weight,
        lambda2_bound=bound,
        lower_certificate=lower,
        expansion_bound=expansion_bound,
        passed=True,
    )


def contraction_trace_check(dim: int, trials: int = settings.TECHNICAL_TRIALS, seed: int = settings.DEFAULT_SEED) -> float:
    """Worst excess of Re tr(A) over 1 − ε/dim on random contractions A.

    ε is taken as 1 − Re⟨η, Aη⟩ for a random unit vector η and tr is the normalized trace, so a
    non-positive result confirms the estimate on every trial.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        A *= rng.uniform(0.2, 1.0) / np.linalg.norm(A, 2)
        eta = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        eta /= np.linalg.norm(eta)
        eps = 1 - float(np.vdot(eta, A @ eta).real)
        worst = max(worst, float(np.trace(A).real) / dim - (1 - eps / dim))
    return worst


def density_trace_check(dim: int, trials: int = settings.TECHNICAL_TRIALS, seed: int = settings.DEFAULT_SEED) -> float:
    """Worst excess of Re Tr(ρA) over 1 − λ_min(ρ)·ε on random contractions and densities."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        A *= rng.uniform(0.2, 1.0) / np.linalg.norm(A, 2)
        G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = G @ G.conj().T + 0.1 * np.eye(dim)
        rho /= np.trace(rho).real
        eta = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        eta /= np.linalg.norm(eta)
        eps = 1 - float(np.vdot(eta, A @ eta).real)
        smallest = float(np.linalg.eigvalsh(rho)[0])
        worst = max(worst, float(np.trace(rho @ A).real) - (1 - smallest * eps))
    return worst
