from __future__ import annotations

import logging
import math
import re
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from src.services.graph.graph import Graph

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path
    from typing import TextIO

logger: logging.Logger = logging.getLogger(__name__)

COMMENT_PREFIXES: tuple[str, ...] = ("#", "%")
# written by write_edge_list; fixes n and the vertex order
SIZE_HEADER_PATTERN: re.Pattern[str] = re.compile(r"^#\s*n=(\d+)(?:\s+m=\d+)?\s*$")


class MergePolicy(str, Enum):
    ERROR = "error"
    SUM = "sum"
    MAX = "max"

    @classmethod
    def from_string(cls, value: str) -> MergePolicy:
        try:
            return cls(value)

        except ValueError as e:
            valid_values: str = ", ".join([member.value for member in cls])
            error_msg: str = (
                f"Invalid merge policy: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg) from e

    def merge(self, existing: float, incoming: float, line_number: int) -> float:
        match self:
            case MergePolicy.ERROR:
                error_msg: str = (
                    f"Duplicate undirected edge on line {line_number}; "
                    "pass a merge policy of 'sum' or 'max' to combine duplicates"
                )
                raise EdgeListValidationError(error_msg)
            case MergePolicy.SUM:
                return existing + incoming
            case MergePolicy.MAX:
                return max(existing, incoming)
            case _:
                error_msg = f"Invalid merge policy: {self}"
                raise ValueError(error_msg)


class EdgeListParseError(ValueError):
    def __init__(self, line_number: int, line: str, reason: str) -> None:
        self.line_number: int = line_number
        self.line: str = line
        super().__init__(f"Line {line_number}: {reason}: {line!r}")


class EdgeListValidationError(ValueError):
    pass


def _parse_id(token: str, line_number: int, line: str) -> int:
    try:
        value: int = int(token)
    except ValueError as e:
        raise EdgeListParseError(line_number, line, "vertex id is not an integer") from e

    if value < 0:
        raise EdgeListParseError(line_number, line, "vertex id is negative")

    return value


def _parse_weight(token: str, line_number: int, line: str) -> float:
    try:
        weight: float = float(token)
    except ValueError as e:
        raise EdgeListParseError(line_number, line, "weight is not a number") from e

    if not math.isfinite(weight):
        raise EdgeListParseError(line_number, line, "weight is not finite")

    if weight <= 0:
        error_msg: str = f"Line {line_number}: weight must be positive, got {weight}"
        raise EdgeListValidationError(error_msg)

    return weight


def load_edge_list(
    stream: Iterable[str],
    merge_policy: MergePolicy = MergePolicy.ERROR,
) -> Graph:
    """Parse "i j" / "i j w" lines into a Graph.

    Ids are remapped to 0..n-1 by first appearance and kept as labels. A leading
    "# n=N" header (as written by write_edge_list) fixes the vertices to ids 0..N-1
    in order, isolated ones included.
    """
    id_to_index: dict[int, int] = {}
    declared_n: int | None = None
    edges: dict[tuple[int, int], float] = {}
    self_loops: int = 0
    for line_number, raw_line in enumerate(stream, start=1):
        line: str = raw_line.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            header: re.Match[str] | None = SIZE_HEADER_PATTERN.match(line)
            if header is not None and declared_n is None and not id_to_index:
                declared_n = int(header.group(1))
                id_to_index = {vertex: vertex for vertex in range(declared_n)}
            continue

        tokens: list[str] = line.split()
        if len(tokens) not in (2, 3):
            raise EdgeListParseError(line_number, line, "expected 'i j' or 'i j w'")

        source: int = id_to_index.setdefault(
            _parse_id(tokens[0], line_number, line),
            len(id_to_index),
        )
        target: int = id_to_index.setdefault(
            _parse_id(tokens[1], line_number, line),
            len(id_to_index),
        )
        if declared_n is not None and len(id_to_index) > declared_n:
            error_msg: str = (
                f"Line {line_number}: vertex id outside the declared n={declared_n}"
            )
            raise EdgeListValidationError(error_msg)

        weight: float = (
            _parse_weight(tokens[2], line_number, line) if len(tokens) == 3 else 1.0
        )
        if source == target:
            self_loops += 1
            continue

        key: tuple[int, int] = (min(source, target), max(source, target))
        if key in edges:
            edges[key] = merge_policy.merge(edges[key], weight, line_number)
        else:
            edges[key] = weight

    if self_loops:
        logger.info("Dropped %d self-loops", self_loops)

    pairs: np.ndarray = np.array(list(edges.keys()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(
        len(id_to_index),
        pairs[:, 0],
        pairs[:, 1],
        np.fromiter(edges.values(), dtype=np.float64, count=len(edges)),
        labels=list(id_to_index.keys()),
    )


def load_edge_list_path(
    path: Path,
    merge_policy: MergePolicy = MergePolicy.ERROR,
) -> Graph:
    if not path.exists():
        error_msg: str = f"File not found at {path}"
        raise FileNotFoundError(error_msg)

    with path.open(encoding="utf-8") as file:
        graph: Graph = load_edge_list(file, merge_policy=merge_policy)

    logger.info("Loaded %s: n=%d |E|=%d", path.name, graph.n, graph.num_edges)
    return graph


def write_edge_list(
    graph: Graph,
    stream: TextIO,
) -> int:
    """Write the graph in the format load_edge_list reads; returns edge lines written."""
    heads, tails, weights = graph.upper_edges()
    weighted: bool = not graph.is_unweighted
    stream.write(f"# n={graph.n} m={graph.num_edges}\n")
    for head, tail, weight in zip(heads.tolist(), tails.tolist(), weights.tolist(), strict=True):
        if weighted:
            stream.write(f"{head} {tail} {weight!r}\n")
        else:
            stream.write(f"{head} {tail}\n")

    return int(heads.size)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_load_edge_list_path_graph() -> None:
    """Two lines give the path on three vertices."""
    graph: Graph = load_edge_list(["0 1", "1 2"])
    assert graph.n == 3
    assert graph.num_edges == 2
    assert np.all(graph.adjacency.data == 1.0)


def test_load_edge_list_drops_self_loops() -> None:
    """A self-loop is dropped but its vertex is kept."""
    graph: Graph = load_edge_list(["5 5", "5 6"])
    assert graph.n == 2
    assert graph.num_edges == 1
    assert graph.labels == (5, 6)


def test_load_edge_list_skips_comments_and_remaps_ids() -> None:
    """Comment lines are ignored and sparse ids become dense indices."""
    lines: list[str] = [
        "# Directed graph (each unordered pair of nodes is saved once)",
        "% matrix market style comment",
        "",
        "100 7 2.5",
        "7 42",
    ]
    graph: Graph = load_edge_list(lines)
    assert graph.labels == (100, 7, 42)
    assert graph.adjacency[0, 1] == 2.5
    assert graph.adjacency[1, 2] == 1.0


def test_load_edge_list_parse_errors_carry_line_number() -> None:
    """Malformed lines raise EdgeListParseError naming the line."""
    import pytest

    with pytest.raises(EdgeListParseError, match="Line 2") as exc_info:
        load_edge_list(["0 1", "1 x"])
    assert exc_info.value.line_number == 2
    with pytest.raises(EdgeListParseError, match="expected"):
        load_edge_list(["0 1 2 3"])
    with pytest.raises(EdgeListParseError, match="negative"):
        load_edge_list(["-1 2"])


def test_load_edge_list_rejects_non_positive_weight() -> None:
    """Negative or zero weights raise EdgeListValidationError."""
    import pytest

    with pytest.raises(EdgeListValidationError, match="positive"):
        load_edge_list(["0 1 -0.5"])
    with pytest.raises(EdgeListValidationError, match="positive"):
        load_edge_list(["0 1 0"])


def test_load_edge_list_merge_policies() -> None:
    """Duplicates error by default and otherwise sum or take the max."""
    import pytest

    lines: list[str] = ["0 1 2.0", "1 0 3.0"]
    with pytest.raises(EdgeListValidationError, match="Duplicate"):
        load_edge_list(lines)
    assert load_edge_list(lines, MergePolicy.SUM).adjacency[0, 1] == 5.0
    assert load_edge_list(lines, MergePolicy.MAX).adjacency[1, 0] == 3.0


def test_merge_policy_from_string() -> None:
    """Unknown policies list the valid values."""
    import pytest

    assert MergePolicy.from_string("sum") is MergePolicy.SUM
    with pytest.raises(ValueError, match="Valid values are: error, sum, max"):
        MergePolicy.from_string("min")


def test_write_edge_list_round_trip() -> None:
    """Writing then loading preserves n, |E| and weights."""
    import io

    graph: Graph = Graph.from_edges(4, [0, 1, 2], [1, 2, 3], [0.1, 1.0 / 3.0, 2.0])
    buffer: io.StringIO = io.StringIO()
    assert write_edge_list(graph, buffer) == 3
    reloaded: Graph = load_edge_list(io.StringIO(buffer.getvalue()))
    assert reloaded.n == graph.n
    assert reloaded.num_edges == graph.num_edges
    assert np.array_equal(reloaded.adjacency.toarray(), graph.adjacency.toarray())


def test_write_edge_list_keeps_isolated_vertices() -> None:
    """The size header brings back isolated vertices in their original positions."""
    import io

    from src.services.generators.random_graphs import erdos_renyi

    graph: Graph = erdos_renyi(50, 0.02, seed=1)
    assert int(np.sum(graph.degrees == 0)) > 0
    buffer: io.StringIO = io.StringIO()
    write_edge_list(graph, buffer)
    reloaded: Graph = load_edge_list(io.StringIO(buffer.getvalue()))
    assert reloaded.n == 50
    assert reloaded.num_edges == graph.num_edges
    assert np.array_equal(reloaded.adjacency.toarray(), graph.adjacency.toarray())
    assert reloaded.labels == tuple(range(50))


def test_size_header_bounds_vertex_ids() -> None:
    """Ids beyond the declared n are rejected; a header after edges is a plain comment."""
    import pytest

    assert load_edge_list(["# n=5 m=1", "0 1"]).n == 5
    with pytest.raises(EdgeListValidationError, match="declared n=3"):
        load_edge_list(["# n=3 m=1", "0 7"])
    late: Graph = load_edge_list(["10 11", "# n=5 m=1"])
    assert late.n == 2
    assert late.labels == (10, 11)


def test_load_edge_list_path_missing_file() -> None:
    """A missing path raises FileNotFoundError."""
    import tempfile
    from pathlib import Path

    import pytest

    with tempfile.TemporaryDirectory() as temp_dir, pytest.raises(FileNotFoundError):
        load_edge_list_path(Path(temp_dir) / "missing.txt")


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
