import pytest

from qexpander.expanders.dualcayley import DualGroupAlgebra
from qexpander.expanders.formats import format_edge_list
from qexpander.expanders.graphs import petersen_graph
from qexpander.expanders.groups import (
    alternating_group,
    cyclic_group,
    generated_subgroup,
    irreps,
    symmetric_group,
)


@pytest.fixture(scope="session")
def s3():
    return symmetric_group(3)


@pytest.fixture(scope="session")
def s4():
    return symmetric_group(4)


@pytest.fixture(scope="session")
def z4():
    return cyclic_group(4)


@pytest.fixture(scope="session")
def a5():
    return alternating_group(5)


@pytest.fixture(scope="session")
def s4_irreps(s4):
    return irreps(s4, seed=42)


@pytest.fixture(scope="session")
def s3_dual(s3):
    return DualGroupAlgebra.of(s3, seed=42)


@pytest.fixture(scope="session")
def petersen():
    return petersen_graph()


@pytest.fixture(scope="session")
def s4_factors(s4):
    """Z4 = <(1 2 3 4)> and the stabilizer of point 4, as ambient indices."""
    cycle = s4.index_of([1, 2, 3, 0])
    three_cycle = s4.index_of([1, 2, 0, 3])
    swap = s4.index_of([1, 0, 2, 3])
    return generated_subgroup(s4, [cycle]), generated_subgroup(s4, [three_cycle, swap])


@pytest.fixture
def s3_file(tmp_path):
    path = tmp_path / "s3.grp"
    path.write_text("# S3\n(1,2,3)\n(1,2)\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def s4_file(tmp_path):
    path = tmp_path / "s4.grp"
    path.write_text("(1,2,3,4)\n(1,2)\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def petersen_file(tmp_path, petersen):
    path = tmp_path / "petersen.txt"
    path.write_text(format_edge_list(petersen), encoding="utf-8")
    return str(path)
