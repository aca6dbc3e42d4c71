"""Analyses behind the command line: each returns the numbers and pass/fail checks of one report."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..settings import ExpanderSettings
from .bicrossed import (
    beta_orbit,
    bicrossed_channel,
    composition_contraction,
    covariant_rep,
    from_factorization,
    intertwiner_dimension,
    magic_unitary,
    mixed_unitary_channel,
    orbits,
    pvm_phase_unitary,
    rep_V,
)
from .channels import (
    Channel,
    check_gap_certificate,
    choi,
    degree,
    diagonal_restriction,
    estimate_hq,
    fixed_space_matches_commutant,
    harrow_channel,
    lambda2,
    lift_graph,
    transfer_matrix,
    transfer_spectrum,
    validate,
)
from .dualcayley import (
    DualGroupAlgebra,
    cayley_connected,
    classical_cayley_operator,
    coideal_from_subgroup,
    convolve,
    convolve_definitional,
    dual_group,
    dual_kazhdan_bound,
    quantum_cayley,
    schreier_gap_certificate,
    schreier_restrict,
)
from .exceptions import CertificateViolated, InputError, ParseError, TooLarge
from .formats import (
    channel_to_json,
    irreps_to_json,
    parse_elements,
    read_channel,
    read_edge_list,
    read_group,
    write_text,
)
from .graphs import cayley_graph, check_cheeger, cycle_cover_decomposition, margulis_check, schreier_graph, spectral_data
from .groups import (
    FiniteGroup,
    Irrep,
    character_inner_product,
    generated_subgroup,
    irreps,
    kazhdan_lower_bound,
    subgroups,
    symmetric_closure,
    transpositions,
)
from .numerics import is_projection, rank_eps, unitarity_defect
from .qgraphs import from_channel, gap, is_completely_positive, is_quantum_adjacency, is_regular, normalized_choi

settings = ExpanderSettings()


@dataclass
class Analysis:
    """Payload of a report: computed numbers, named checks and the tables `--csv` can write.

    `adjacency` maps the position of a subgroup in the report to its weighted Schreier adjacency.
    """

    results: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    spectrum: Optional[List[float]] = None
    adjacency: Dict[int, npt.NDArray[np.int64]] = field(default_factory=dict)


def _floats(values: Sequence[float]) -> List[float]:
    return [float(v) for v in values]


def resolve_set(group: FiniteGroup, spec: str) -> List[int]:
    """Generating set by name ("transpositions", "all") or as ";"-separated cycle notation.

    A "sym:" prefix adds the inverse of every listed element.
    """
    if spec == "transpositions":
        return transpositions(group)
    if spec == "all":
        return list(range(1, group.order))
    if spec.startswith("sym:"):
        return symmetric_closure(group, parse_elements(spec[4:], group))
    return sorted(set(parse_elements(spec, group)))


def resolve_irreps(representations: Sequence[Irrep], spec: str) -> List[int]:
    """Irrep subset as "nontrivial", "dim:k" or comma-separated indices into the irrep list."""
    if spec == "nontrivial":
        return [i for i, rep in enumerate(representations) if not rep.is_trivial()]
    if spec.startswith("dim:"):
        try:
            wanted = int(spec[4:])
        except ValueError as exc:
            raise ParseError(f"bad irrep dimension in {spec!r}") from exc
        return [i for i, rep in enumerate(representations) if rep.dimension == wanted]
    try:
        chosen = sorted({int(x) for x in spec.split(",") if x.strip()})
    except ValueError as exc:
        raise ParseError(f"irrep subset must be indices, 'dim:k' or 'nontrivial', got {spec!r}") from exc
    if any(not 0 <= x < len(representations) for x in chosen):
        raise InputError(f"irrep indices must lie in 0..{len(representations) - 1}")
    return chosen


def _sandwich(Phi: Channel, budget: int, seed: int, tol: float) -> Dict[str, float]:
    value = lambda2(Phi)
    estimate = estimate_hq(Phi, budget, seed)
    upper = float(np.sqrt(2 * (1 - value))) if value is not None else 1.0
    return {
        "lambda2": value,
        "hq_lower": estimate.lower_certificate,
        "hq_upper": estimate.upper_estimate,
        "cheeger_upper": upper,
        "trials": estimate.trials_used,
        "passed": bool(estimate.lower_certificate <= estimate.upper_estimate + tol and estimate.upper_estimate <= upper + tol),
    }


def analyze_graph(path: str, tol: float) -> Analysis:
    """Spectrum of a graph and, for small connected regular graphs, the Cheeger inequalities.

    Args:
        path: Edge-list file.
        tol: Slack for the inequalities.

    Returns:
        Spectrum, degree and the Cheeger report when brute force is affordable.
    """
    G = read_edge_list(path)
    data = spectral_data(G)
    analysis = Analysis(spectrum=list(data.eigenvalues))
    analysis.results.update(
        vertices=G.vertex_count,
        edges=len(G.edges),
        degree=data.regular_degree,
        connected=data.is_connected,
        lambda2=data.lambda2,
        spectrum=list(data.eigenvalues),
    )
    if data.regular_degree is None or not data.is_connected:
        logging.info("Graph is not connected and regular; skipping the Cheeger check")
        return analysis
    try:
        report = check_cheeger(G, tol)
    except TooLarge as exc:
        logging.warning(f"Exact expansion skipped: {exc}")
        return analysis
    analysis.results["cheeger"] = report.model_dump()
    analysis.checks["cheeger"] = report.passed
    return analysis


def lift_graph_file(path: str, seed: int, budget: int, tol: float, channel_out: Optional[str] = None) -> Analysis:
    """Lift a regular graph to the channel Φ_G and check it against the graph.

    Args:
        path: Edge-list file of a regular graph.
        seed: Seed of the cycle cover decomposition and of the h_Q search.
        budget: Random restarts for the h_Q search.
        tol: Tolerance for bistochasticity and undirectedness.
        channel_out: Optional path for the channel JSON.

    Returns:
        Decomposition, validation, Kraus rank and quantum graph checks.
    """
    G = read_edge_list(path)
    decomposition = cycle_cover_decomposition(G, seed)
    Phi = lift_graph(G, decomposition)
    d = decomposition.degree
    validation = validate(Phi, tol)
    restriction = diagonal_restriction(Phi)
    restriction_defect = float(np.abs(restriction - G.adjacency() / d).max())
    quantum_graph = from_channel(transfer_matrix(Phi), float(d))
    projection = normalized_choi(quantum_graph)

    analysis = Analysis(spectrum=_floats(np.linalg.eigvalsh(restriction)[::-1]))
    analysis.results.update(
        permutations=[list(p) for p in decomposition.permutations],
        validation=validation.model_dump(),
        kraus_rank=degree(Phi),
        diagonal_spectrum=analysis.spectrum,
        transfer_spectrum=_floats(transfer_spectrum(Phi)),
    )
    hq = estimate_hq(Phi, budget, seed)
    analysis.results["hq"] = {"lower": hq.lower_certificate, "upper": hq.upper_estimate, "trials": hq.trials_used}
    analysis.checks.update(
        cp=validation.cp,
        tp=validation.tp,
        unital=validation.unital,
        undirected=validation.undirected,
        degree=degree(Phi) == d,
        diagonal_restriction=restriction_defect <= 1e-12,
        choi_projection=is_projection(projection, 1e-8) and rank_eps(projection) == d,
        quantum_adjacency=is_quantum_adjacency(quantum_graph, 1e-8),
    )
    if channel_out:
        write_text(channel_out, channel_to_json(Phi))
        logging.info(f"Channel written to {channel_out}")
    return analysis


def group_irreps(path: str, seed: int, export: Optional[str] = None) -> Analysis:
    """Irreducible representations of a group with orthogonality and homomorphism checks."""
    group = read_group(path)
    representations = irreps(group, seed)
    characters = np.stack([rep.character for rep in representations])
    gram = np.array([[character_inner_product(a, b) for b in characters] for a in characters])
    orthogonality = float(np.abs(gram - np.eye(len(representations))).max())
    homomorphism = max(rep.homomorphism_defect(group) for rep in representations)

    analysis = Analysis()
    analysis.results.update(
        order=group.order,
        abelian=group.is_abelian(),
        dimensions=[rep.dimension for rep in representations],
        orthogonality_defect=orthogonality,
        homomorphism_defect=homomorphism,
    )
    analysis.checks.update(
        orthogonality=orthogonality <= 1e-8,
        homomorphism=homomorphism <= 1e-8,
        dimension_sum=sum(rep.dimension**2 for rep in representations) == group.order,
    )
    if export:
        write_text(export, irreps_to_json(representations))
        logging.info(f"Irreps written to {export}")
    return analysis


def analyze_channel(path: str, seed: int, budget: int, tol: float) -> Analysis:
    """Validation, spectrum and the quantum Cheeger sandwich of a stored channel."""
    Phi = read_channel(path)
    validation = validate(Phi, tol)
    analysis = Analysis()
    analysis.results.update(validation=validation.model_dump(), kraus_rank=degree(Phi))
    analysis.checks.update(cp=validation.cp)
    if validation.tp and validation.unital:
        distance = fixed_space_matches_commutant(Phi)
        analysis.results["fixed_commutant_distance"] = distance
        analysis.checks["fixed_points_equal_commutant"] = distance <= 1e-7
    if not validation.undirected:
        logging.info("Channel is not undirected; no spectral analysis")
        return analysis
    analysis.spectrum = _floats(transfer_spectrum(Phi))
    analysis.results["spectrum"] = analysis.spectrum
    if validation.connected and Phi.dim > 1:
        sandwich = _sandwich(Phi, budget, seed, tol)
        analysis.results["sandwich"] = sandwich
        analysis.checks["cheeger_sandwich"] = sandwich["passed"]
    elif Phi.dim > 1:
        hq = estimate_hq(Phi, budget, seed)
        analysis.results["hq"] = {"lower": hq.lower_certificate, "upper": hq.upper_estimate, "trials": hq.trials_used}
    return analysis


def harrow(path: str, set_spec: str, seed: int, budget: int, tol: float) -> Analysis:
    """Channels of all nontrivial irreps on a generating set, against the Cayley graph and Kazhdan bounds.

    Args:
        path: Group file.
        set_spec: Generating set, see `resolve_set`.
        seed: Seed for irreps and the h_Q search.
        budget: Random restarts for the h_Q search.
        tol: Slack for all asserted inequalities.

    Returns:
        One row per nontrivial irrep.

    Raises:
        CertificateViolated: If a channel breaks the Cayley comparison or the Kazhdan bound.
    """
    group = read_group(path)
    S = resolve_set(group, set_spec)
    representations = irreps(group, seed)
    eps = kazhdan_lower_bound(group, S, representations)
    cayley = spectral_data(cayley_graph(group, S))
    rows = []
    analysis = Analysis(spectrum=list(cayley.eigenvalues))
    for index, rep in enumerate(representations):
        if rep.is_trivial():
            continue
        Phi = harrow_channel(rep, S, group, tol)
        row: Dict[str, Any] = {"irrep": index, "dimension": rep.dimension}
        if Phi.dim > 1:
            certificate = check_gap_certificate(Phi, eps, len(S), tol=tol)
            sandwich = _sandwich(Phi, budget, seed, tol)
            row.update(certificate=certificate.model_dump(), sandwich=sandwich)
            analysis.checks[f"harrow_{index}"] = certificate.lambda2 <= cayley.lambda2 / len(S) + tol
            analysis.checks[f"sandwich_{index}"] = sandwich["passed"]
        rows.append(row)
    analysis.results.update(
        order=group.order,
        generating_set=S,
        cayley_lambda2=cayley.lambda2,
        cayley_bound=cayley.lambda2 / len(S),
        kazhdan_eps=eps,
        irreps=rows,
    )
    return analysis


def _parse_state(spec: str, size: int) -> Optional[np.ndarray]:
    if spec == "tr":
        return None
    if spec.startswith("diag:"):
        try:
            weights = [float(x) for x in spec[5:].split(",")]
        except ValueError as exc:
            raise ParseError(f"bad diagonal state {spec!r}") from exc
        if len(weights) != size:
            raise InputError(f"diagonal state needs {size} weights, got {len(weights)}")
        return np.diag(weights)
    raise ParseError(f"state must be 'tr' or 'diag:w1,...', got {spec!r}")


def bicrossed(path: str, gamma_spec: str, g_spec: str, orbit_spec: Optional[str], state_spec: str, tol: float) -> Analysis:
    """Matched pair of a factorization, its magic unitary and the bicrossed channel of one orbit.

    Args:
        path: Ambient group file.
        gamma_spec: Generators of Γ in cycle notation.
        g_spec: Generators of G in cycle notation.
        orbit_spec: An element of Γ whose β-orbit is used; the largest orbit when omitted.
        state_spec: "tr" for the normalized trace or "diag:w1,w2,..." for a diagonal state.
        tol: Tolerance for the channel checks.

    Returns:
        Orbits, magic unitary entries, channel validation and the mixed-unitary comparison.
    """
    group = read_group(path)
    Gamma = generated_subgroup(group, parse_elements(gamma_spec, group))
    G = generated_subgroup(group, parse_elements(g_spec, group))
    mp = from_factorization(group, Gamma, G)
    all_orbits = orbits(mp)
    if orbit_spec:
        orbit = beta_orbit(mp, parse_elements(orbit_spec, group)[0])
    else:
        orbit = max(all_orbits, key=len)
    magic = magic_unitary(mp, orbit)
    state = _parse_state(state_spec, len(orbit))
    Phi = bicrossed_channel(mp, orbit, state)
    validation = validate(Phi, tol)
    V = rep_V(mp, orbit)
    lemma_deviations = [pvm_phase_unitary(magic.row_pvm(r))[1] for r in range(magic.size)]

    analysis = Analysis()
    analysis.results.update(
        gamma=list(mp.gamma_part),
        g=list(mp.g_part),
        orbit_sizes=[len(o) for o in all_orbits],
        orbit=list(orbit),
        magic_unitary=[[[mp.g_part[k] for k in np.nonzero(magic.entries[r, s])[0]] for s in range(magic.size)] for r in range(magic.size)],
        validation=validation.model_dump(),
        unitarity_defect=unitarity_defect(V),
        intertwiner_dimension=intertwiner_dimension(mp, orbit),
        phase_unitary_deviations=lemma_deviations,
    )
    analysis.checks.update(
        cp=validation.cp,
        tp=validation.tp,
        unital=validation.unital,
        v_unitary=unitarity_defect(V) <= 1e-12,
        covariance=covariant_rep(mp).covariance_defect() == 0.0,
        phase_unitary=max(lemma_deviations) <= 1e-12,
    )
    if state is None:
        difference = float(np.abs(choi(Phi) - choi(mixed_unitary_channel(mp, orbit))).max())
        analysis.results["mixed_unitary_difference"] = difference
        analysis.checks["mixed_unitary"] = difference <= 1e-9
        contraction = composition_contraction(mp, orbit)
        analysis.results["contraction"] = {"bicrossed": contraction[0], "conjugation": contraction[1], "composition": contraction[2]}
        analysis.checks["composition_contraction"] = contraction[2] <= contraction[0] * contraction[1] + tol
    return analysis


def _dual_subset(alg: DualGroupAlgebra, spec: str) -> List[int]:
    subset = resolve_irreps(alg.irreps, spec)
    if not subset:
        raise InputError(f"irrep subset {spec!r} is empty")
    return subset


def dual_cayley(path: str, irreps_spec: str, seed: int, tol: float) -> Analysis:
    """Quantum Cayley graph over the dual of a group, its restrictions and certificates.

    Args:
        path: Group file.
        irreps_spec: Generating irrep subset, see `resolve_irreps`.
        seed: Seed for the irreps of the group and of its subgroups.
        tol: Slack for the Schreier certificates.

    Returns:
        Degree, spectrum, restricted spectra per subgroup and their certificates.
    """
    group = read_group(path)
    alg = DualGroupAlgebra.of(group, seed)
    E = _dual_subset(alg, irreps_spec)
    QG = quantum_cayley(alg, E)
    spectrum, value = gap(QG)
    connected = cayley_connected(alg, E)
    eps = dual_kazhdan_bound(alg, E) if connected else None
    if eps is None:
        logging.warning("Quantum Cayley graph is not connected; Schreier certificates skipped")
    E_dims = [alg.irreps[x].dimension for x in E]

    restricted = []
    for H in subgroups(group):
        piece = schreier_restrict(QG, coideal_from_subgroup(alg, H), seed)
        restricted_spectrum, _ = gap(piece)
        row: Dict[str, Any] = {"subgroup": H, "spectrum": _floats(restricted_spectrum * QG.degree)}
        if eps is not None:
            row["certificate"] = schreier_gap_certificate(piece, eps, E_dims, tol).model_dump()
        restricted.append(row)

    analysis = Analysis(spectrum=_floats(spectrum * QG.degree))
    analysis.results.update(
        order=group.order,
        E=E,
        E_dims=E_dims,
        d=QG.degree,
        connected=connected,
        spectrum=analysis.spectrum,
        lambda2=value,
        eps=eps,
        restricted=restricted,
    )
    found_degree = is_regular(QG)
    analysis.checks.update(
        regular=found_degree is not None and abs(found_degree - QG.degree) <= 1e-9,
        quantum_adjacency=is_quantum_adjacency(QG, 1e-8),
        completely_positive=is_completely_positive(QG),
        schreier_certificates=all(row["certificate"]["passed"] for row in restricted if "certificate" in row),
    )
    if group.order <= 24:
        deviation = max(
            float(np.abs(convolve(alg, alg.basis(g), alg.basis(h)) - convolve_definitional(alg, alg.basis(g), alg.basis(h))).max())
            for g in range(group.order)
            for h in range(group.order)
        )
        analysis.results["convolution_deviation"] = deviation
        analysis.checks["convolution"] = deviation <= 1e-10
    if group.is_abelian():
        dual = dual_group(group, alg.irreps)
        adjacency = cayley_graph(dual, E).adjacency()
        analysis.checks["abelian_duality"] = bool(np.abs(QG.A - adjacency).max() <= 1e-10)
    return analysis


def schreier(path: str, subgroup_spec: str, set_spec: Optional[str], irreps_spec: Optional[str], dual: bool, seed: int, tol: float) -> Analysis:
    """Schreier graphs of one subgroup (or of all, with "all") and their spectral gap certificates.

    The classical mode uses a generating set of the group; the dual mode an irrep subset of the
    dual quantum group.
    """
    group = read_group(path)
    if subgroup_spec == "all":
        targets = subgroups(group)
    else:
        targets = [generated_subgroup(group, parse_elements(subgroup_spec, group))]

    analysis = Analysis()
    rows = []
    if dual:
        alg = DualGroupAlgebra.of(group, seed)
        E = _dual_subset(alg, irreps_spec or "nontrivial")
        QG = quantum_cayley(alg, E)
        eps = dual_kazhdan_bound(alg, E)
        E_dims = [alg.irreps[x].dimension for x in E]
        full_spectrum, _ = gap(QG)
        analysis.spectrum = _floats(full_spectrum * QG.degree)
        for H in targets:
            piece = schreier_restrict(QG, coideal_from_subgroup(alg, H), seed)
            spectrum, _ = gap(piece)
            certificate = schreier_gap_certificate(piece, eps, E_dims, tol)
            rows.append({"subgroup": H, "normalized_spectrum": _floats(spectrum), "certificate": certificate.model_dump()})
        analysis.results.update(mode="dual", E=E, eps=eps, connected=cayley_connected(alg, E))
    else:
        S = resolve_set(group, set_spec or "transpositions")
        eps = kazhdan_lower_bound(group, S, irreps(group, seed))
        for H in targets:
            operator = classical_cayley_operator(group, S, H)
            spectrum, _ = gap(operator)
            certificate = schreier_gap_certificate(operator, eps, [1] * len(S), tol)
            row: Dict[str, Any] = {"subgroup": H, "normalized_spectrum": _floats(spectrum), "certificate": certificate.model_dump()}
            adjacency = schreier_graph(group, H, S)
            analysis.adjacency[len(rows)] = adjacency
            analysis.checks[f"schreier_matches_{len(rows)}"] = bool(np.array_equal(operator.A, adjacency))
            if operator.A.shape[0] <= settings.BRUTE_FORCE_MAX_VERTICES:
                margulis = margulis_check(group, H, S, eps, tol)
                row["margulis"] = margulis.model_dump()
                analysis.checks[f"margulis_{len(rows)}"] = margulis.passed
            rows.append(row)
        analysis.results.update(mode="classical", generating_set=S, eps=eps)
    analysis.results["subgroups"] = rows
    analysis.checks["schreier_certificates"] = all(row["certificate"]["passed"] for row in rows)
    return analysis


def certify(eps: float, dimHE: int, lambda_min: Optional[float], channel_path: Optional[str], lambda2_value: Optional[float], tol: float) -> Analysis:
    """Check λ₂ ≤ 1 − λ_min·ε²/2 for a stored channel or a given λ₂; vacuous without either.

    Raises:
        CertificateViolated: If the supplied λ₂ or the channel's λ₂ exceeds the bound.
    """
    if dimHE < 1:
        raise InputError("dimHE must be positive")
    weight = 1 / dimHE if lambda_min is None else lambda_min
    bound = 1 - weight * eps * eps / 2
    analysis = Analysis()
    if channel_path:
        certificate = check_gap_certificate(read_channel(channel_path), eps, dimHE, lambda_min, tol)
        analysis.results["certificate"] = certificate.model_dump()
    elif lambda2_value is not None:
        if lambda2_value > bound + tol:
            raise CertificateViolated("spectral gap bound", lambda2_value, bound)
        analysis.results["certificate"] = {"lambda2": lambda2_value, "lambda2_bound": bound, "expansion_bound": weight * eps * eps / 4}
    else:
        analysis.results["certificate"] = {"lambda2": None, "lambda2_bound": bound, "expansion_bound": weight * eps * eps / 4}
    analysis.results.update(eps=eps, dim_he=dimHE, lambda_min=weight)
    analysis.checks["certificate"] = True
    return analysis
