"""Finite simple graphs: expansion, spectra, Cayley and Schreier graphs, cycle covers."""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .exceptions import (
    ContainsIdentity,
    DecompositionFailed,
    InvalidGraph,
    NotConnected,
    NotRegular,
    TooLarge,
)
from .groups import FiniteGroup, check_symmetric, coset_labels
from .numerics import hermitian_eigvals
from .reports import CheegerReport, MargulisReport

settings = ExpanderSettings()

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Simple undirected loop-free graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u == v:
                raise InvalidGraph(f"loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InvalidGraph(f"edge ({u}, {v}) leaves the vertex range 0..{self.vertex_count - 1}")
            if u > v:
                raise InvalidGraph(f"edge ({u}, {v}) is not normalized; build graphs with Graph.from_edges")

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Normalize edge pairs, rejecting loops and duplicates."""
        normalized = set()
        for u, v in edges:
            pair = (min(int(u), int(v)), max(int(u), int(v)))
            if pair in normalized:
                raise InvalidGraph(f"duplicate edge {pair}")
            normalized.add(pair)
        return cls(vertex_count=vertex_count, edges=frozenset(normalized))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        mapping = {node: index for index, node in enumerate(sorted(graph.nodes()))}
        return cls.from_edges(len(mapping), ((mapping[u], mapping[v]) for u, v in graph.edges()))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        graph.add_edges_from(sorted(self.edges))
        return graph

    def adjacency(self) -> npt.NDArray[np.float64]:
        matrix = np.zeros((self.vertex_count, self.vertex_count))
        for u, v in self.edges:
            matrix[u, v] = matrix[v, u] = 1.0
        return matrix

    def degrees(self) -> npt.NDArray[np.int64]:
        counts = np.zeros(self.vertex_count, dtype=np.int64)
        for u, v in self.edges:
            counts[u] += 1
            counts[v] += 1
        return counts

    def regular_degree(self) -> Optional[int]:
        degrees = self.degrees()
        if degrees.size == 0 or np.any(degrees != degrees[0]):
            return None
        return int(degrees[0])


@dataclass(frozen=True)
class CycleCoverDecomposition:
    """Permutations P_1..P_d of the vertex set, each given by its image list."""

    permutations: Tuple[Tuple[int, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.permutations)

    def matrices(self) -> List[npt.NDArray[np.float64]]:
        """Permutation matrices with P e_v = e_{P(v)}."""
        result = []
        for perm in self.permutations:
            matrix = np.zeros((len(perm), len(perm)))
            matrix[list(perm), np.arange(len(perm))] = 1.0
            result.append(matrix)
        return result

    def is_valid_for(self, G: Graph) -> bool:
        """Sum of the permutation matrices equals A(G), pairs are inverse, a trailing odd one is an involution."""
        if not self.permutations:
            return not G.edges
        total = np.sum(self.matrices(), axis=0)
        if not np.array_equal(total, G.adjacency()):
            return False
        perms = [np.asarray(p) for p in self.permutations]
        for i in range(0, len(perms) - 1, 2):
            if not np.array_equal(perms[i][perms[i + 1]], np.arange(G.vertex_count)):
                return False
        if len(perms) % 2:
            last = perms[-1]
            return bool(np.array_equal(last[last], np.arange(G.vertex_count)) and np.all(last != np.arange(G.vertex_count)))
        return True


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: Tuple[float, ...]  # descending
    lambda2: Optional[float]
    is_connected: bool
    regular_degree: Optional[int]


def cycle_graph(n: int) -> Graph:
    return Graph.from_networkx(nx.cycle_graph(n))


def complete_graph(n: int) -> Graph:
    return Graph.from_networkx(nx.complete_graph(n))


def petersen_graph() -> Graph:
    return Graph.from_networkx(nx.petersen_graph())


def hypercube_graph(k: int) -> Graph:
    cube = nx.convert_node_labels_to_integers(nx.hypercube_graph(k), ordering="sorted")
    return Graph.from_networkx(cube)


def random_regular_graph(d: int, n: int, seed: int) -> Graph:
    return Graph.from_networkx(nx.random_regular_graph(d, n, seed=seed))


def weighted_expansion_constant(W: npt.ArrayLike, chunk: int = 1 << 16) -> float:
    """Minimum of cut(U) / min(|U|, |V∖U|) over proper nonempty U for a symmetric weight matrix.

    cut(U) = Σ_{u∈U, v∉U} W[u, v], so loops never contribute. Subsets are enumerated as bit
    masks over all vertices but the last, which is always placed outside U.

    Raises:
        TooLarge: Beyond BRUTE_FORCE_MAX_VERTICES vertices.
    """
    weights = np.asarray(W, dtype=np.float64)
    n = weights.shape[0]
    if n > settings.BRUTE_FORCE_MAX_VERTICES:
        raise TooLarge(f"{n} vertices exceed the brute-force limit of {settings.BRUTE_FORCE_MAX_VERTICES}")
    if n < 2:
        raise InvalidGraph("expansion needs at least two vertices")
    best = np.inf
    shifts = np.arange(n - 1, dtype=np.int64)
    total = 1 << (n - 1)
    for start in range(1, total, chunk):
        masks = np.arange(start, min(total, start + chunk), dtype=np.int64)
        inside = np.zeros((masks.size, n))
        inside[:, : n - 1] = (masks[:, None] >> shifts) & 1
        cut = ((inside @ weights) * (1.0 - inside)).sum(axis=1)
        size = inside.sum(axis=1)
        best = min(best, float(np.min(cut / np.minimum(size, n - size))))
    return best


def expansion_constant(G: Graph) -> float:
    """Exact expansion constant h(G) by exhaustive subset enumeration."""
    return weighted_expansion_constant(G.adjacency())


def spectral_data(G: Graph) -> SpectralData:
    """Adjacency spectrum, second eigenvalue, connectivity and regular degree."""
    if G.vertex_count < 1:
        raise InvalidGraph("graph has no vertices")
    eigenvalues = hermitian_eigvals(G.adjacency())[::-1]
    degree = G.regular_degree()
    if degree is not None:
        connected = int(np.count_nonzero(np.abs(eigenvalues - degree) <= 1e-9 * max(1, degree))) == 1
    else:
        connected = nx.is_connected(G.to_networkx())
    lambda2 = float(eigenvalues[1]) if eigenvalues.size > 1 else None
    return SpectralData(
        eigenvalues=tuple(float(x) for x in eigenvalues),
        lambda2=lambda2,
        is_connected=bool(connected),
        regular_degree=degree,
    )


def check_cheeger(G: Graph, tol: float = settings.DEFAULT_TOL) -> CheegerReport:
    """Verify ½(d−λ₂) ≤ h(G) ≤ √(2d(d−λ₂)) and h(G) ≤ √(d²−λ₂²).

    Raises:
        NotRegular: If G is not regular.
        NotConnected: If G is disconnected.
    """
    data = spectral_data(G)
    if data.regular_degree is None:
        raise NotRegular("Cheeger check requires a regular graph")
    if not data.is_connected:
        raise NotConnected("Cheeger check requires a connected graph")
    d = data.regular_degree
    lambda2 = float(data.lambda2)
    h = expansion_constant(G)
    lower = (d - lambda2) / 2
    upper = float(np.sqrt(max(0.0, 2 * d * (d - lambda2))))
    mohar = float(np.sqrt(max(0.0, d * d - lambda2 * lambda2)))
    passed = lower <= h + tol and h <= upper + tol and h <= mohar + tol
    logging.info(f"Cheeger check: {lower:.6f} <= h = {h:.6f} <= {mohar:.6f} ({'pass' if passed else 'FAIL'})")
    return CheegerReport(
        degree=d,
        lambda2=lambda2,
        expansion=h,
        lower_bound=lower,
        upper_bound=upper,
        mohar_bound=mohar,
        passed=passed,
    )


def cayley_graph(Gamma: FiniteGroup, S: Iterable[int], left: bool = False) -> Graph:
    """Cayley graph with edges {g, gs} (or {g, sg} when `left` is set) for s ∈ S.

    Raises:
        NotSymmetric: If S ≠ S⁻¹.
        ContainsIdentity: If e ∈ S.
    """
    elements = check_symmetric(Gamma, S)
    if 0 in elements:
        raise ContainsIdentity("generating set contains the identity")
    edges = set()
    for g in range(Gamma.order):
        for s in elements:
            h = int(Gamma.mult[s, g]) if left else int(Gamma.mult[g, s])
            edges.add((min(g, h), max(g, h)))
    return Graph(vertex_count=Gamma.order, edges=frozenset(edges))


def schreier_graph(Gamma: FiniteGroup, H: Iterable[int], S: Iterable[int], simple: bool = False) -> npt.NDArray[np.int64]:
    """Weighted adjacency of the Schreier coset graph on left cosets gH.

    Entry (i, j) counts the s ∈ S with s·g_iH = g_jH; loops and multiplicities are kept so that
    every row sums to |S|. With `simple` the support without loops is returned instead.
    """
    elements = check_symmetric(Gamma, S)
    partition, labels = coset_labels(Gamma, H)
    weights = np.zeros((len(partition), len(partition)), dtype=np.int64)
    for i, coset in enumerate(partition):
        g = coset[0]
        for s in elements:
            weights[i, labels[Gamma.mult[s, g]]] += 1
    if simple:
        support = (weights > 0).astype(np.int64)
        np.fill_diagonal(support, 0)
        return support
    return weights


def margulis_check(Gamma: FiniteGroup, H: Iterable[int], S: Iterable[int], eps: float, tol: float = settings.DEFAULT_TOL) -> MargulisReport:
    """Check h(C(Γ/H, S)) ≥ ε²/4 for the weighted operator and for its simple projection.

    `eps` must be a Kazhdan constant for (Γ, S). A single coset has no cut and passes vacuously.
    """
    weighted = schreier_graph(Gamma, H, S)
    bound = eps * eps / 4
    if weighted.shape[0] < 2:
        return MargulisReport(cosets=weighted.shape[0], eps=eps, bound=bound, passed=True)
    weighted_h = weighted_expansion_constant(weighted)
    simple_h = weighted_expansion_constant(schreier_graph(Gamma, H, S, simple=True))
    return MargulisReport(
        cosets=weighted.shape[0],
        eps=eps,
        bound=bound,
        weighted_expansion=weighted_h,
        simple_expansion=simple_h,
        passed=weighted_h + tol >= bound and simple_h + tol >= bound,
    )


def _perfect_matching(graph: nx.Graph, rng: np.random.Generator) -> List[Edge]:
    nodes = sorted(graph.nodes())
    shuffled = dict(zip(nodes, rng.permutation(len(nodes)).tolist()))
    back = {label: node for node, label in shuffled.items()}
    matching = nx.max_weight_matching(nx.relabel_nodes(graph, shuffled), maxcardinality=True)
    if 2 * len(matching) != len(nodes):
        raise DecompositionFailed("perfect matching")
    return [(back[u], back[v]) for u, v in matching]


def _two_factor(graph: nx.Graph, rng: np.random.Generator, stage: str) -> List[int]:
    """Successor map of a spanning 2-regular subgraph of an even-regular graph.

    Every component is oriented along an Euler circuit, so each vertex has equal in- and
    out-degree; a perfect matching between out-copies and in-copies picks one outgoing and one
    incoming edge per vertex.
    """
    nodes = sorted(graph.nodes())
    arcs = []
    for component in nx.connected_components(graph):
        members = sorted(component)
        start = members[int(rng.integers(len(members)))]
        arcs.extend(nx.eulerian_circuit(graph.subgraph(members), source=start))
    order = rng.permutation(len(arcs))
    bipartite = nx.Graph()
    tails = [("out", v) for v in nodes]
    bipartite.add_nodes_from(tails)
    bipartite.add_nodes_from(("in", v) for v in nodes)
    bipartite.add_edges_from((("out", arcs[i][0]), ("in", arcs[i][1])) for i in order)
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=tails)
    if len(matching) != 2 * len(nodes):
        raise DecompositionFailed(stage)
    successor = [0] * len(nodes)
    for v in nodes:
        successor[v] = matching[("out", v)][1]
    return successor


def _decompose(G: Graph, d: int, rng: np.random.Generator) -> CycleCoverDecomposition:
    remaining = G.to_networkx()
    perms: List[Tuple[int, ...]] = []
    matching: List[Edge] = []
    if d % 2:
        matching = _perfect_matching(remaining, rng)
        remaining.remove_edges_from(matching)
    for index in range(d // 2):
        successor = _two_factor(remaining, rng, stage=f"2-factor {index + 1}")
        forward = tuple(successor)
        backward = [0] * len(successor)
        for v, w in enumerate(successor):
            backward[w] = v
        perms.extend([forward, tuple(backward)])
        remaining.remove_edges_from((v, w) for v, w in enumerate(successor))
    if matching:
        involution = list(range(G.vertex_count))
        for u, v in matching:
            involution[u], involution[v] = v, u
        perms.append(tuple(involution))
    return CycleCoverDecomposition(permutations=tuple(perms))


def cycle_cover_decomposition(G: Graph, seed: int = settings.DEFAULT_SEED) -> CycleCoverDecomposition:
    """Split A(G) of a d-regular graph into d permutation matrices.

    ⌊d/2⌋ spanning 2-factors are extracted one after another, each traversed in both
    directions; for odd d a perfect matching is removed first and returned last as the
    involution P_d.

    Args:
        G: Regular graph.
        seed: Seed for the Euler circuit start points and matching tie-breaks.

    Returns:
        Decomposition whose permutation matrices sum to A(G).

    Raises:
        NotRegular: If G is not regular.
        DecompositionFailed: If every reseeded attempt dead-ends; `stage` names the failing step.
    """
    d = G.regular_degree()
    if d is None:
        raise NotRegular("cycle cover decomposition requires a regular graph")
    last_error: Optional[DecompositionFailed] = None
    for attempt in range(settings.COVER_MAX_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        try:
            decomposition = _decompose(G, d, rng)
        except DecompositionFailed as exc:
            logging.warning(f"Cycle cover attempt {attempt + 1} failed at {exc.stage}")
            last_error = exc
            continue
        logging.debug(f"Decomposed {d}-regular graph on {G.vertex_count} vertices (attempt {attempt + 1})")
        return decomposition
    raise DecompositionFailed(last_error.stage if last_error else "unknown")
