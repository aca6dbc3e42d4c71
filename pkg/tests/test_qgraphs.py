import numpy as np
import pytest

from qexpander.expanders.channels import lift_graph, transfer_matrix, weyl_mixture
from qexpander.expanders.exceptions import InputError, NotRegular
from qexpander.expanders.graphs import cycle_cover_decomposition
from qexpander.expanders.numerics import is_projection, rank_eps
from qexpander.expanders.qgraphs import (
    MultiMatrixAlgebra,
    QuantumGraph,
    complete_quantum_graph,
    from_channel,
    gap,
    is_completely_positive,
    is_quantum_adjacency,
    is_regular,
    mult_adjoint,
    multiplication,
    normalized_choi,
    schur_square,
)


def test_multiplication_is_coisometry():
    alg = MultiMatrixAlgebra((1, 2, 3))
    m = multiplication(alg)
    np.testing.assert_allclose(m @ mult_adjoint(alg), np.eye(alg.dimension), atol=1e-12)


def test_coordinates_and_product():
    alg = MultiMatrixAlgebra((1, 2))
    rng = np.random.default_rng(0)
    x = [rng.normal(size=(1, 1)), rng.normal(size=(2, 2))]
    y = [rng.normal(size=(1, 1)), rng.normal(size=(2, 2))]
    coords = alg.to_coords(x)
    for block, original in zip(alg.from_coords(coords), x):
        np.testing.assert_allclose(block, original)
    product = alg.from_coords(alg.product(coords, alg.to_coords(y)))
    np.testing.assert_allclose(product[1], x[1] @ y[1])
    assert alg.psi(alg.unit()) == pytest.approx(5.0)
    np.testing.assert_allclose(np.diag(alg.gram()), [1, 2, 2, 2, 2])


def test_multiplication_matches_block_product():
    alg = MultiMatrixAlgebra((2, 1))
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=alg.dimension), rng.normal(size=alg.dimension)
    np.testing.assert_allclose(multiplication(alg) @ np.kron(a, b), alg.product(a, b), atol=1e-12)


def test_complete_quantum_graph():
    alg = MultiMatrixAlgebra((1, 2))
    QG = complete_quantum_graph(alg)
    assert is_quantum_adjacency(QG)
    assert is_completely_positive(QG)
    assert is_regular(QG) == pytest.approx(5.0)
    spectrum, value = gap(QG)
    np.testing.assert_allclose(spectrum, [1, 0, 0, 0, 0], atol=1e-12)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_schur_square_of_identity_is_identity():
    alg = MultiMatrixAlgebra((2, 2))
    QG = QuantumGraph(algebra=alg, A=np.eye(alg.dimension, dtype=complex))
    np.testing.assert_allclose(schur_square(QG), np.eye(alg.dimension), atol=1e-12)
    assert not is_quantum_adjacency(QuantumGraph(algebra=alg, A=2 * np.eye(alg.dimension, dtype=complex)))


def test_weyl_mixture_quantum_graph():
    QG = from_channel(transfer_matrix(weyl_mixture(3, 4)), 4.0)
    assert is_quantum_adjacency(QG)
    assert is_completely_positive(QG)
    J = normalized_choi(QG)
    assert is_projection(J)
    assert rank_eps(J) == 4


def test_lifted_graph_is_quantum_adjacency(petersen):
    Phi = lift_graph(petersen, cycle_cover_decomposition(petersen, seed=4))
    QG = from_channel(transfer_matrix(Phi), 3.0)
    assert is_quantum_adjacency(QG)
    assert is_regular(QG) == pytest.approx(3.0)
    assert rank_eps(normalized_choi(QG)) == 3


def test_irregular_graph_has_no_gap():
    alg = MultiMatrixAlgebra((1, 1))
    QG = QuantumGraph(algebra=alg, A=np.diag([1.0, 0.0]).astype(complex))
    assert is_regular(QG) is None
    with pytest.raises(NotRegular):
        gap(QG)


def test_shape_checks():
    with pytest.raises(InputError):
        MultiMatrixAlgebra((2, 0))
    with pytest.raises(InputError):
        QuantumGraph(algebra=MultiMatrixAlgebra((2,)), A=np.eye(3))
    with pytest.raises(InputError):
        normalized_choi(complete_quantum_graph(MultiMatrixAlgebra((1, 1))))
