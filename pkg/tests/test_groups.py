import numpy as np
import pytest

from qexpander.expanders.exceptions import ClosureTooLarge, InputError, NotASubgroup, NotGenerating, NotSymmetric
from qexpander.expanders.groups import (
    character_inner_product,
    conjugacy_classes,
    cosets,
    cyclic_group,
    direct_product,
    from_multiplication_table,
    generated_subgroup,
    irreps,
    kazhdan_lower_bound,
    regular_matrix,
    subgroup_group,
    subgroups,
    symmetric_closure,
    symmetric_group,
    transpositions,
)


def test_symmetric_group_closure(s4):
    assert s4.order == 24
    assert not s4.is_abelian()
    assert len(transpositions(s4)) == 6
    assert len(conjugacy_classes(s4)) == 5
    cycle = s4.index_of([1, 2, 3, 0])
    assert s4.element_order(cycle) == 4
    assert s4.product(cycle, s4.inverse(cycle)) == 0


def test_permutation_products_compose_right_to_left(s4):
    g = s4.index_of([1, 0, 2, 3])
    h = s4.index_of([0, 2, 1, 3])
    expected = s4.permutations[g][s4.permutations[h]]
    assert s4.permutations[s4.product(g, h)].tolist() == expected.tolist()


def test_multiplication_table_round_trip():
    z3 = from_multiplication_table([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    assert z3.is_abelian()
    np.testing.assert_array_equal(z3.mult, cyclic_group(3).mult)


def test_bad_multiplication_tables():
    with pytest.raises(InputError):
        from_multiplication_table([[0, 1], [1, 1]])
    with pytest.raises(InputError):
        from_multiplication_table([[1, 0], [0, 1]])


def test_closure_limit():
    with pytest.raises(ClosureTooLarge):
        symmetric_group(8)


def test_s4_irreps(s4, s4_irreps):
    assert [rep.dimension for rep in s4_irreps] == [1, 1, 2, 3, 3]
    assert s4_irreps[0].is_trivial()
    for rep in s4_irreps:
        assert rep.homomorphism_defect(s4) < 1e-8
    gram = np.array([[character_inner_product(a.character, b.character) for b in s4_irreps] for a in s4_irreps])
    assert np.abs(gram - np.eye(5)).max() < 1e-8


def test_irreps_of_product_group():
    group = direct_product(cyclic_group(2), symmetric_group(3))
    dims = sorted(rep.dimension for rep in irreps(group, seed=7))
    assert dims == [1, 1, 1, 1, 2, 2]


def test_regular_matrix_is_homomorphism(s3):
    for g in range(s3.order):
        for h in range(s3.order):
            np.testing.assert_array_equal(regular_matrix(s3, g) @ regular_matrix(s3, h), regular_matrix(s3, s3.product(g, h)))


def test_kazhdan_constant_of_transpositions(s4, s4_irreps):
    eps = kazhdan_lower_bound(s4, transpositions(s4), s4_irreps)
    assert eps == pytest.approx(np.sqrt(4 / 3))


def test_kazhdan_constant_rejects_bad_sets(s4, s4_irreps):
    cycle = s4.index_of([1, 2, 3, 0])
    with pytest.raises(NotSymmetric):
        kazhdan_lower_bound(s4, [cycle], s4_irreps)
    with pytest.raises(NotGenerating):
        kazhdan_lower_bound(s4, [cycle, s4.inverse(cycle)], s4_irreps)


def test_subgroups_and_cosets(s3, s4):
    assert [len(H) for H in subgroups(s3)] == [1, 2, 2, 2, 3, 6]
    assert len(subgroups(s4)) == 30
    stabilizer = generated_subgroup(s4, [s4.index_of([1, 2, 0, 3]), s4.index_of([1, 0, 2, 3])])
    partition = cosets(s4, stabilizer)
    assert len(partition) == 4
    assert sorted(x for coset in partition for x in coset) == list(range(24))
    with pytest.raises(NotASubgroup):
        cosets(s4, [1, 2])


def test_subgroup_group(s4):
    cycle = s4.index_of([1, 2, 3, 0])
    group, elements = subgroup_group(s4, generated_subgroup(s4, [cycle]))
    assert group.order == 4
    assert group.is_abelian()
    assert elements.tolist() == generated_subgroup(s4, [cycle])


def test_kazhdan_constant_grows_along_generating_chain(s4, s4_irreps):
    S = transpositions(s4)
    three_cycles = [g for g in range(s4.order) if s4.element_order(g) == 3]
    everything = list(range(1, s4.order))
    tops = []
    for chain in (S, S + three_cycles, everything):
        eps = kazhdan_lower_bound(s4, chain, s4_irreps)
        tops.append(1 - eps * eps / 2)
    assert tops == pytest.approx([1 / 3, 1 / 7, -1 / 23])


@pytest.mark.parametrize(("name", "seed"), [("s3", 0), ("s4", 42), ("a5", 7)])
def test_irreps_have_scalar_commutant(request, name, seed):
    Gamma = request.getfixturevalue(name)
    for rep in irreps(Gamma, seed=seed):
        n = rep.dimension
        constraints = np.vstack([np.kron(M, np.eye(n)) - np.kron(np.eye(n), M.T) for M in rep.matrices])
        singular_values = np.linalg.svd(constraints, compute_uv=False)
        assert np.count_nonzero(singular_values <= 1e-8) == 1


def test_symmetric_closure_adds_inverses(s4):
    cycle = s4.index_of([1, 2, 0, 3])
    closed = symmetric_closure(s4, [cycle])
    assert closed == sorted({cycle, int(s4.inv[cycle])})
    assert len(closed) == 2
    assert symmetric_closure(s4, closed) == closed
