"""Reading and writing edge lists, group files, channel / quantum graph / irrep JSON and CSV tables."""

import csv
import logging
import os
import re
from typing import List, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, TypeAdapter, ValidationError

from ..settings import ReportSettings
from .channels import Channel
from .exceptions import ParseError
from .graphs import Graph
from .groups import FiniteGroup, Irrep, from_multiplication_table, from_permutation_generators
from .qgraphs import MultiMatrixAlgebra, QuantumGraph

report_settings = ReportSettings()

_CYCLE = re.compile(r"\(([^()]*)\)")


class ChannelFile(BaseModel):
    dim: int
    kraus: List[List[float]]


class QuantumGraphFile(BaseModel):
    blocks: List[int]
    A: List[List[float]]


class IrrepFile(BaseModel):
    dimension: int
    matrices: List[List[float]]


_IRREPS = TypeAdapter(List[IrrepFile])


def interleave(matrix: npt.ArrayLike) -> List[float]:
    """Row-major re, im, re, im, ... of a complex matrix."""
    values = np.asarray(matrix, dtype=np.complex128).reshape(-1)
    return np.column_stack([values.real, values.imag]).reshape(-1).tolist()


def deinterleave(values: Sequence[float], rows: int, cols: Optional[int] = None) -> npt.NDArray[np.complex128]:
    array = np.asarray(values, dtype=np.float64)
    cols = rows if cols is None else cols
    if array.size != 2 * rows * cols:
        raise ParseError(f"expected {2 * rows * cols} interleaved values, got {array.size}")
    return (array[0::2] + 1j * array[1::2]).reshape(rows, cols)


def _read_text(path: str) -> str:
    if not os.path.exists(path):
        raise ParseError(f"File not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _content_lines(text: str) -> List[str]:
    lines = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            lines.append(stripped)
    return lines


# Graphs


def parse_edge_list(text: str) -> Graph:
    """First line "n m", then m lines "u v" with 0-based vertices."""
    lines = _content_lines(text)
    if not lines:
        raise ParseError("edge list is empty")
    try:
        n, m = (int(x) for x in lines[0].split())
        edges = [tuple(int(x) for x in line.split()) for line in lines[1:]]
    except ValueError as exc:
        raise ParseError(f"malformed edge list: {exc}") from exc
    if len(edges) != m:
        raise ParseError(f"header announces {m} edges, found {len(edges)}")
    if any(len(edge) != 2 for edge in edges):
        raise ParseError("every edge line needs exactly two vertices")
    return Graph.from_edges(n, edges)


def read_edge_list(path: str) -> Graph:
    graph = parse_edge_list(_read_text(path))
    logging.info(f"Read graph with {graph.vertex_count} vertices and {len(graph.edges)} edges from {path}")
    return graph


def format_edge_list(G: Graph) -> str:
    lines = [f"{G.vertex_count} {len(G.edges)}"]
    lines.extend(f"{u} {v}" for u, v in sorted(G.edges))
    return "\n".join(lines) + "\n"


# Groups


def parse_cycles(text: str, points: Optional[int] = None) -> List[int]:
    """0-based image list of a permutation in 1-based cycle notation, e.g. "(1,2,3)(4,5)".

    Entries inside a cycle may be separated by commas or spaces; "()" is the identity.
    """
    stripped = text.strip()
    cycles = _CYCLE.findall(stripped)
    if (stripped and not cycles) or _CYCLE.sub("", stripped).strip():
        raise ParseError(f"not a cycle-notation permutation: {text!r}")
    try:
        parsed = [[int(x) - 1 for x in re.split(r"[,\s]+", cycle.strip()) if x] for cycle in cycles]
    except ValueError as exc:
        raise ParseError(f"non-integer point in {text!r}") from exc
    largest = max((max(cycle) + 1 for cycle in parsed if cycle), default=1)
    size = max(largest, points or 0)
    image = list(range(size))
    seen = set()
    for cycle in parsed:
        if any(x < 0 for x in cycle) or seen & set(cycle) or len(set(cycle)) != len(cycle):
            raise ParseError(f"cycles of {text!r} are not disjoint positive points")
        seen.update(cycle)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            image[a] = b
    return image


def parse_generators(text: str) -> List[List[int]]:
    """Several cycle-notation permutations separated by ";" or newlines, padded to a common size."""
    pieces = [piece for piece in re.split(r"[;\n]", text) if piece.strip()]
    perms = [parse_cycles(piece) for piece in pieces]
    points = max((len(p) for p in perms), default=1)
    return [p + list(range(len(p), points)) for p in perms]


def parse_group(text: str, csv_table: bool = False) -> FiniteGroup:
    if csv_table:
        try:
            table = [[int(x) for x in row] for row in csv.reader(_content_lines(text))]
        except ValueError as exc:
            raise ParseError(f"multiplication table entries must be integers: {exc}") from exc
        return from_multiplication_table(table)
    return from_permutation_generators(parse_generators("\n".join(_content_lines(text))))


def read_group(path: str) -> FiniteGroup:
    """Group file: one generator per line in cycle notation, or a .csv multiplication table."""
    group = parse_group(_read_text(path), csv_table=path.lower().endswith(".csv"))
    logging.info(f"Read group of order {group.order} from {path}")
    return group


def parse_elements(text: str, group: FiniteGroup) -> List[int]:
    """Element indices of ";"-separated cycle-notation permutations."""
    if group.permutations is None:
        raise ParseError("elements can be named by permutations only in permutation groups")
    points = group.permutations.shape[1]
    elements = []
    for perm in parse_generators(text):
        if len(perm) > points:
            raise ParseError(f"permutation moves points beyond {points}")
        elements.append(group.index_of(perm + list(range(len(perm), points))))
    return elements


# Channels, quantum graphs and irreps


def channel_to_json(Phi: Channel) -> str:
    model = ChannelFile(dim=Phi.dim, kraus=[interleave(K) for K in Phi.kraus])
    return model.model_dump_json(indent=report_settings.REPORT_INDENT)


def channel_from_json(text: str) -> Channel:
    try:
        model = ChannelFile.model_validate_json(text)
    except ValidationError as exc:
        raise ParseError(f"invalid channel file: {exc}") from exc
    return Channel.from_kraus(deinterleave(values, model.dim) for values in model.kraus)


def read_channel(path: str) -> Channel:
    return channel_from_json(_read_text(path))


def quantum_graph_to_json(QG: QuantumGraph) -> str:
    model = QuantumGraphFile(blocks=list(QG.algebra.block_dims), A=[interleave(row) for row in QG.A])
    return model.model_dump_json(indent=report_settings.REPORT_INDENT)


def quantum_graph_from_json(text: str) -> QuantumGraph:
    try:
        model = QuantumGraphFile.model_validate_json(text)
    except ValidationError as exc:
        raise ParseError(f"invalid quantum graph file: {exc}") from exc
    algebra = MultiMatrixAlgebra(tuple(model.blocks))
    L = algebra.dimension
    if len(model.A) != L:
        raise ParseError(f"adjacency needs {L} rows, got {len(model.A)}")
    return QuantumGraph(algebra=algebra, A=np.vstack([deinterleave(row, 1, L) for row in model.A]))


def irreps_to_json(representations: Sequence[Irrep]) -> str:
    models = [IrrepFile(dimension=rep.dimension, matrices=[interleave(M) for M in rep.matrices]) for rep in representations]
    return _IRREPS.dump_json(models, indent=report_settings.REPORT_INDENT).decode("utf-8")


def irreps_from_json(text: str) -> List[Irrep]:
    try:
        models = _IRREPS.validate_json(text)
    except ValidationError as exc:
        raise ParseError(f"invalid irreps file: {exc}") from exc
    return [Irrep(matrices=np.stack([deinterleave(values, model.dimension) for values in model.matrices])) for model in models]


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def write_spectrum_csv(path: str, eigenvalues: Sequence[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter=report_settings.CSV_DELIMITER)
        writer.writerow(["index", "eigenvalue"])
        for index, value in enumerate(eigenvalues):
            writer.writerow([index, repr(float(value))])



def write_adjacency_csv(path: str, adjacencies: Mapping[int, npt.ArrayLike]) -> None:
    """Nonzero entries of weighted adjacency matrices as `subgroup,row,col,weight` rows."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter=report_settings.CSV_DELIMITER)
        writer.writerow(["subgroup", "row", "col", "weight"])
        for key in sorted(adjacencies):
            matrix = np.asarray(adjacencies[key])
            for row, col in zip(*np.nonzero(matrix)):
                writer.writerow([key, int(row), int(col), matrix[row, col].item()])
