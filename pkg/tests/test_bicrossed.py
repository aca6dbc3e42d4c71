import numpy as np
import pytest

from qexpander.expanders.bicrossed import (
    beta_orbit,
    bicrossed_channel,
    check_state,
    composition_contraction,
    conjugation_channel,
    covariant_rep,
    from_factorization,
    intertwiner_dimension,
    magic_unitary,
    mixed_unitary_channel,
    orbits,
    pvm_phase_unitary,
    rep_V,
)
from qexpander.expanders.channels import choi, validate
from qexpander.expanders.exceptions import NotAPVM, NotAState, NotExactFactorization
from qexpander.expanders.groups import cyclic_group, generated_subgroup
from qexpander.expanders.numerics import unitarity_defect


@pytest.fixture(scope="module")
def pair(s4, s4_factors):
    return from_factorization(s4, *s4_factors)


@pytest.fixture(scope="module")
def orbit(pair):
    return max(orbits(pair), key=len)


def test_factorization_of_s4(s4, pair):
    assert len(pair.gamma_part) == 4
    assert len(pair.g_part) == 6
    assert pair.alpha.shape == (4, 6)
    assert pair.beta.shape == (6, 4)
    assert not pair.is_trivial_beta()
    for gamma in pair.gamma_part:
        for g in pair.g_part:
            assert s4.product(gamma, g) == s4.product(pair.alpha_of(gamma, g), pair.beta_of(g, gamma))


def test_orbits(pair):
    assert sorted(len(o) for o in orbits(pair)) == [1, 3]
    assert beta_orbit(pair, 0) == (0,)


def test_magic_unitary(pair, orbit):
    magic = magic_unitary(pair, orbit)
    assert magic.size == 3
    for r in range(3):
        np.testing.assert_array_equal(sum(magic.row_pvm(r)), np.eye(6))
        np.testing.assert_array_equal(sum(magic.projection(s, r) for s in range(3)), np.eye(6))


def test_covariant_representation(pair, orbit):
    assert covariant_rep(pair).covariance_defect() == 0.0
    assert unitarity_defect(rep_V(pair, orbit)) < 1e-12
    assert intertwiner_dimension(pair, orbit) >= 1


def test_tracial_channel(pair, orbit):
    Phi = bicrossed_channel(pair, orbit)
    validation = validate(Phi)
    assert validation.cp and validation.tp and validation.unital
    assert Phi.dim == 6
    np.testing.assert_allclose(choi(Phi), choi(mixed_unitary_channel(pair, orbit)), atol=1e-9)


def test_composition_contracts(pair, orbit):
    bicrossed, conjugation, composed = composition_contraction(pair, orbit)
    assert composed <= bicrossed * conjugation + 1e-9
    assert conjugation_channel(pair, orbit).tp_defect() < 1e-12


def test_non_faithful_state(pair, orbit):
    Phi = bicrossed_channel(pair, orbit, np.diag([1.0, 0.0, 0.0]))
    assert Phi.unital_defect() < 1e-12
    assert validate(Phi).cp


def test_state_checks():
    with pytest.raises(NotAState):
        check_state(np.eye(3), 3)
    with pytest.raises(NotAState):
        check_state(np.eye(2) / 2, 3)
    with pytest.raises(NotAState):
        check_state(np.diag([1.5, -0.5]), 2)


def test_phase_unitary_reproduces_pinching():
    pvm = [np.diag([1.0, 0.0, 0.0]), np.diag([0.0, 1.0, 1.0])]
    U, deviation = pvm_phase_unitary(pvm)
    assert unitarity_defect(U) < 1e-12
    assert deviation < 1e-12
    with pytest.raises(NotAPVM):
        pvm_phase_unitary([np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 1.0, 1.0])])
    with pytest.raises(NotAPVM):
        pvm_phase_unitary([np.diag([1.0, 0.0, 0.0])])


def test_abelian_factorization_has_trivial_beta():
    z6 = cyclic_group(6)
    pair = from_factorization(z6, [0, 3], [0, 2, 4])
    assert pair.is_trivial_beta()
    assert all(len(o) == 1 for o in orbits(pair))


def test_rejects_non_exact_factorizations(s4, s4_factors):
    gamma, g = s4_factors
    with pytest.raises(NotExactFactorization):
        from_factorization(s4, gamma, gamma)
    swap = generated_subgroup(s4, [s4.index_of([1, 0, 2, 3])])
    with pytest.raises(NotExactFactorization):
        from_factorization(s4, gamma, swap)
    with pytest.raises(NotExactFactorization):
        from_factorization(s4, [0, 1], g)


@pytest.mark.parametrize(
    "pvm",
    [
        [np.eye(2)],
        [np.diag([1.0, 0.0, 0.0, 0.0]), np.diag([0.0, 1.0, 0.0, 0.0]), np.diag([0.0, 0.0, 1.0, 1.0])],
        [np.full((2, 2), 0.5), np.array([[0.5, -0.5], [-0.5, 0.5]])],
    ],
)
def test_phase_unitary_fixtures(pvm):
    _, deviation = pvm_phase_unitary(pvm)
    assert deviation <= 1e-12


def test_magic_unitary_rows_give_exact_pinching(pair, orbit):
    magic = magic_unitary(pair, orbit)
    for r in range(magic.size):
        row = [p for p in magic.row_pvm(r) if p.any()]
        assert pvm_phase_unitary(row)[1] <= 1e-12
