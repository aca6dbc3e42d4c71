import numpy as np
import pytest

from qexpander.expanders.channels import (
    Channel,
    canonical_graph_channel,
    check_gap_certificate,
    choi,
    compose,
    contraction_trace_check,
    degree,
    density_trace_check,
    diagonal_restriction,
    estimate_hq,
    fixed_space_matches_commutant,
    harrow_channel,
    is_connected,
    lambda2,
    lift_graph,
    minimal_kraus,
    mixed_unitary,
    projector_ratio,
    rep_channel,
    second_singular_value,
    transfer_matrix,
    transfer_spectrum,
    validate,
    weyl_mixture,
)
from qexpander.expanders.exceptions import (
    CertificateViolated,
    InputError,
    NotConnected,
    NotFaithfulState,
    NotUnitaryBlock,
    TrivialRep,
)
from qexpander.expanders.graphs import cayley_graph, cycle_cover_decomposition, cycle_graph, random_regular_graph, spectral_data
from qexpander.expanders.groups import direct_sum, irreps, kazhdan_lower_bound, transpositions
from qexpander.expanders.qgraphs import from_channel, is_quantum_adjacency

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])


def qubit_oracle():
    """½ Ad_X + ½ completely depolarizing."""
    return mixed_unitary([I2, X, Y, Z], [1 / 8, 5 / 8, 1 / 8, 1 / 8])


def test_qubit_oracle_spectrum():
    Phi = qubit_oracle()
    validation = validate(Phi)
    assert validation.cp and validation.tp and validation.unital and validation.undirected
    assert validation.connected
    np.testing.assert_allclose(transfer_spectrum(Phi), [1, 0.5, -0.5, -0.5], atol=1e-12)
    assert lambda2(Phi) == pytest.approx(0.5)


def test_qubit_oracle_expansion_bracket():
    estimate = estimate_hq(qubit_oracle(), budget=20, seed=3)
    assert estimate.lower_certificate == pytest.approx(0.25)
    assert estimate.upper_estimate == pytest.approx(0.25, abs=1e-6)
    assert projector_ratio(qubit_oracle(), estimate.witness_projector) == pytest.approx(estimate.upper_estimate, abs=1e-9)


def test_lifted_petersen_channel(petersen):
    decomposition = cycle_cover_decomposition(petersen, seed=1)
    Phi = lift_graph(petersen, decomposition)
    validation = validate(Phi)
    assert validation.cp and validation.tp and validation.unital and validation.undirected
    assert degree(Phi) == 3
    np.testing.assert_allclose(diagonal_restriction(Phi), petersen.adjacency() / 3, atol=1e-12)
    assert fixed_space_matches_commutant(Phi) < 1e-7


def test_lifted_channels_are_never_connected(petersen):
    Phi = lift_graph(petersen, cycle_cover_decomposition(petersen, seed=1))
    assert not is_connected(Phi)
    with pytest.raises(NotConnected):
        lambda2(Phi)
    estimate = estimate_hq(Phi, budget=5, seed=0)
    assert estimate.lower_certificate == 0.0


def test_projector_ratio_of_diagonal_cut(petersen):
    Phi = lift_graph(petersen, cycle_cover_decomposition(petersen, seed=2))
    outer_cycle = np.diag([1.0] * 5 + [0.0] * 5)
    assert projector_ratio(Phi, outer_cycle) == pytest.approx(1 / 3)
    with pytest.raises(InputError):
        projector_ratio(Phi, np.eye(10))


def test_canonical_graph_channel_degree(petersen):
    Phi = canonical_graph_channel(petersen)
    assert Phi.tp_defect() < 1e-12
    assert degree(Phi) == 30


def test_weyl_mixture():
    full = weyl_mixture(3, 9)
    np.testing.assert_allclose(transfer_spectrum(full), [1] + [0] * 8, atol=1e-12)
    assert lambda2(full) == pytest.approx(0.0, abs=1e-12)
    assert degree(weyl_mixture(3, 4)) == 4
    with pytest.raises(InputError):
        weyl_mixture(2, 5)


def test_minimal_kraus_merges_duplicates():
    Phi = mixed_unitary([X, X, Z])
    reduced = minimal_kraus(Phi)
    assert reduced.kraus_count == 2
    np.testing.assert_allclose(choi(reduced), choi(Phi), atol=1e-12)


def test_composition_with_depolarizing():
    depolarizing = weyl_mixture(2, 4)
    composed = compose(qubit_oracle(), depolarizing)
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    np.testing.assert_allclose(composed(rho), I2 / 2, atol=1e-12)
    assert second_singular_value(composed) == pytest.approx(0.0, abs=1e-12)
    assert second_singular_value(qubit_oracle()) == pytest.approx(0.5)


def test_harrow_channels_of_s4(s4, s4_irreps):
    S = transpositions(s4)
    bound = spectral_data(cayley_graph(s4, S)).lambda2 / len(S)
    assert bound == pytest.approx(1 / 3)
    eps = kazhdan_lower_bound(s4, S, s4_irreps)
    values = []
    for rep in s4_irreps[1:]:
        Phi = harrow_channel(rep, S, s4)
        if Phi.dim == 1:
            continue
        certificate = check_gap_certificate(Phi, eps, len(S))
        assert certificate.passed
        assert certificate.lambda2_bound == pytest.approx(8 / 9)
        values.append(certificate.lambda2)
    assert max(values) == pytest.approx(1 / 3)
    assert min(values) == pytest.approx(0.0, abs=1e-10)


def test_harrow_channels_of_a5(a5):
    S = [a5.index_of(p) for p in ([1, 2, 3, 4, 0], [4, 0, 1, 2, 3], [1, 2, 0, 3, 4], [2, 0, 1, 3, 4])]
    representations = irreps(a5, seed=5)
    assert sorted(rep.dimension for rep in representations) == [1, 3, 3, 4, 5]
    bound = spectral_data(cayley_graph(a5, S)).lambda2 / len(S)
    for rep in representations[1:]:
        Phi = harrow_channel(rep, S, a5)
        assert lambda2(Phi) <= bound + 1e-9


def test_harrow_channel_rejects_trivial_irrep(s4, s4_irreps):
    with pytest.raises(TrivialRep):
        harrow_channel(s4_irreps[0], transpositions(s4))


def test_gap_certificate_violation():
    with pytest.raises(CertificateViolated):
        check_gap_certificate(qubit_oracle(), eps=2.0, dimHE=1)


def test_rep_channel_from_unitary_block():
    U = np.kron(np.diag([1.0, 0.0]), X) + np.kron(np.diag([0.0, 1.0]), Z)
    Phi = rep_channel([("block", U)], [np.diag([0.5, 0.5])])
    assert Phi.tp_defect() < 1e-12
    assert Phi.unital_defect() < 1e-12
    rho = np.array([[0.6, 0.1], [0.1, 0.4]])
    np.testing.assert_allclose(Phi(rho), 0.5 * X @ rho @ X + 0.5 * Z @ rho @ Z, atol=1e-12)


def test_rep_channel_state_checks():
    U = np.eye(4)
    with pytest.raises(NotFaithfulState):
        rep_channel([("block", U)], [np.diag([1.0, 0.0])])
    Phi = rep_channel([("block", U)], [np.diag([1.0, 0.0])], faithful=False)
    assert Phi.kraus_count == 2
    with pytest.raises(NotUnitaryBlock):
        rep_channel([("block", 2 * U)], [np.diag([0.5, 0.5])])


def test_channel_shape_validation():
    with pytest.raises(InputError):
        Channel(kraus=np.zeros((1, 2, 3)))


def test_trace_estimates_on_random_contractions():
    assert contraction_trace_check(4, trials=200, seed=1) <= 1e-12
    assert density_trace_check(3, trials=200, seed=1) <= 1e-12


def test_two_vertex_fixture():
    Phi = Channel.from_kraus([X])
    assert validate(Phi).fixed_space_dim == 2
    estimate = estimate_hq(Phi, budget=5, seed=0)
    assert estimate.upper_estimate <= 1e-10
    assert projector_ratio(Phi, estimate.witness_projector) <= 1e-10


def test_cycle_lift_diagonal_gap():
    Phi = lift_graph(cycle_graph(6), cycle_cover_decomposition(cycle_graph(6), seed=0))
    spectrum = np.linalg.eigvalsh(diagonal_restriction(Phi))[::-1]
    assert spectrum[1] == pytest.approx(0.5)
    assert estimate_hq(Phi, budget=3, seed=0).upper_estimate == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1])
def test_lift_consistency_on_random_regular_graphs(seed):
    G = random_regular_graph(4, 12, seed=seed)
    Phi = lift_graph(G, cycle_cover_decomposition(G, seed=seed))
    np.testing.assert_allclose(diagonal_restriction(Phi), G.adjacency() / 4, atol=1e-12)
    assert degree(Phi) == 4
    assert is_quantum_adjacency(from_channel(transfer_matrix(Phi), 4.0), 1e-8)


def test_non_tracial_gap_certificate(s3):
    representations = irreps(s3, seed=0)
    two_dim = next(rep for rep in representations if rep.dimension == 2)
    S = transpositions(s3)
    eps = kazhdan_lower_bound(s3, S, representations)
    U = np.zeros((6, 6), dtype=complex)
    for a, s in enumerate(S):
        U[2 * a : 2 * a + 2, 2 * a : 2 * a + 2] = two_dim(s)
    Phi = rep_channel([("transpositions", U)], [np.diag([0.5, 0.3, 0.2])])
    np.testing.assert_allclose(choi(Phi), choi(mixed_unitary([two_dim(s) for s in S], [0.5, 0.3, 0.2])), atol=1e-12)
    certificate = check_gap_certificate(Phi, eps, len(S), lambda_min=0.2)
    assert certificate.passed
    assert certificate.lambda2_bound == pytest.approx(1 - 0.2 * eps * eps / 2)


def test_fixed_points_of_direct_sums(s4, s4_irreps):
    S = transpositions(s4)
    x, y = s4_irreps[2], s4_irreps[3]
    for summands, expected in [((x,), 1), ((x, x), 4), ((x, y), 2)]:
        matrices = direct_sum(*summands)
        Phi = mixed_unitary([matrices[s] for s in S])
        assert validate(Phi).fixed_space_dim == expected
        assert fixed_space_matches_commutant(Phi) <= 1e-7


def test_harrow_channel_of_s3(s3):
    S = transpositions(s3)
    two_dimensional = next(rep for rep in irreps(s3, seed=0) if rep.dimension == 2)
    Phi = harrow_channel(two_dimensional, S, s3)
    np.testing.assert_allclose(transfer_spectrum(Phi), [1, 0, 0, -1], atol=1e-10)
    assert lambda2(Phi) == pytest.approx(0.0, abs=1e-10)
    assert spectral_data(cayley_graph(s3, S)).lambda2 == pytest.approx(0.0, abs=1e-10)


def harrow_cases(s3, s4, a5):
    yield s3, transpositions(s3)
    yield s4, transpositions(s4)
    yield a5, [a5.index_of(p) for p in ([1, 2, 3, 4, 0], [4, 0, 1, 2, 3], [1, 2, 0, 3, 4], [2, 0, 1, 3, 4])]


def test_cheeger_sandwich_on_harrow_channels(s3, s4, a5):
    checked = 0
    for Gamma, S in harrow_cases(s3, s4, a5):
        for rep in irreps(Gamma, seed=42)[1:]:
            if rep.dimension == 1:
                continue
            Phi = harrow_channel(rep, S, Gamma)
            value = lambda2(Phi)
            estimate = estimate_hq(Phi, budget=200, seed=42)
            assert estimate.lower_certificate == pytest.approx((1 - value) / 2)
            assert estimate.lower_certificate <= estimate.upper_estimate + 1e-9
            assert estimate.upper_estimate <= np.sqrt(2 * (1 - value)) + 1e-9
            checked += 1
    assert checked == 1 + 3 + 4
