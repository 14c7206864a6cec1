from __future__ import annotations

from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from pydantic import BaseModel, Field

from src.services.graph.graph import Graph, NodeFunction, inner_product_V

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

BINARY_TOLERANCE: float = 1e-12


class Cut(NamedTuple):
    side: NodeFunction
    size: float


class CutSummary(BaseModel):
    """Best / average / least over a batch of cut sizes."""

    sizes: list[float] = Field(min_length=1)
    best: float
    avg: float
    least: float

    @classmethod
    def from_sizes(
        cls: type[CutSummary],
        sizes: Sequence[float],
    ) -> CutSummary:
        values: NodeFunction = np.asarray(sizes, dtype=np.float64)
        if values.size == 0:
            error_msg: str = "At least one cut size is required"
            raise ValueError(error_msg)

        best: float = float(values.max())
        least: float = float(values.min())
        # the mean of equal values can round past them
        avg: float = min(max(float(values.mean()), least), best)
        return cls(sizes=values.tolist(), best=best, avg=avg, least=least)


def is_binary(
    u: NodeFunction,
    tolerance: float = BINARY_TOLERANCE,
) -> bool:
    return bool(
        np.all((np.abs(u - 1.0) <= tolerance) | (np.abs(u + 1.0) <= tolerance)),
    )


def threshold(u: NodeFunction) -> NodeFunction:
    """u_i > 0 maps to +1, u_i <= 0 to -1."""
    return np.where(u > 0, 1.0, -1.0)


def edge_scan_cut_size(
    graph: Graph,
    side: NodeFunction,
) -> float:
    """Sum of w_ij over i < j with side_i != side_j."""
    columns: npt.NDArray[np.int32] = graph.adjacency.indices
    crossing: npt.NDArray[np.bool_] = graph.upper_mask & (
        side[graph.rows] != side[columns]
    )
    return float(np.sum(graph.adjacency.data[crossing]))


def cut_from_function(
    graph: Graph,
    u: NodeFunction,
) -> Cut:
    side: NodeFunction = threshold(u)
    return Cut(side=side, size=edge_scan_cut_size(graph, side))


def cut_size_via_laplacian(
    graph: Graph,
    u: NodeFunction,
    r: float = 0.0,
) -> float:
    """s(C) = 1/4 <u, Delta_r u>_V for binary u."""
    if not is_binary(u):
        error_msg: str = "Cut size via the Laplacian requires u in {-1, 1}^n"
        raise ValueError(error_msg)

    from src.services.operators.laplacian import apply_operator
    from src.services.operators.operator_kind import OperatorKind

    kind: OperatorKind = OperatorKind.standard(r)
    return 0.25 * inner_product_V(graph, u, apply_operator(kind, graph, u), r)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _triangle() -> Graph:
    return Graph.from_edges(3, [0, 0, 1], [1, 2, 2])


def test_cut_from_function_examples() -> None:
    """Triangle, all-plus and the odd cycle."""
    triangle: Graph = _triangle()
    assert cut_from_function(triangle, np.array([1.0, 1.0, -1.0])).size == 2.0
    assert cut_from_function(triangle, np.ones(3)).size == 0.0
    cycle: Graph = Graph.from_edges(5, [0, 1, 2, 3, 4], [1, 2, 3, 4, 0])
    alternating: NodeFunction = np.array([1.0, -1.0, 1.0, -1.0, -1.0])
    assert cut_from_function(cycle, alternating).size == 4.0


def test_threshold_sends_zero_to_minus_one() -> None:
    """Boundary values fall on the -1 side."""
    assert np.array_equal(threshold(np.array([0.3, -0.2, 0.0])), [1.0, -1.0, -1.0])
    assert np.array_equal(threshold(np.zeros(3)), [-1.0, -1.0, -1.0])


def test_cut_complement_symmetry() -> None:
    """Flipping every side leaves the cut size unchanged."""
    rng: np.random.Generator = np.random.default_rng(11)
    heads = rng.integers(0, 20, 80)
    tails = rng.integers(0, 20, 80)
    graph: Graph = Graph.from_edges(20, heads, tails, rng.uniform(0.5, 2.0, 80))
    u: NodeFunction = np.where(rng.random(20) < 0.5, 1.0, -1.0)
    assert cut_from_function(graph, u).size == cut_from_function(graph, -u).size


def test_cut_size_via_laplacian_examples() -> None:
    """Triangle at r=0 and K2 at several r."""
    assert cut_size_via_laplacian(_triangle(), np.array([1.0, 1.0, -1.0])) == 2.0
    edge: Graph = Graph.from_edges(2, [0], [1])
    for r in (0.0, 0.5, 1.0):
        assert np.isclose(cut_size_via_laplacian(edge, np.array([1.0, -1.0]), r), 1.0)


def test_cut_size_via_laplacian_matches_edge_scan() -> None:
    """Quadratic-form cut size equals the edge scan for every r."""
    for seed in range(200):
        rng: np.random.Generator = np.random.default_rng(seed)
        n: int = int(rng.integers(4, 25))
        upper = np.triu(rng.random((n, n)) < 0.5, k=1)
        heads, tails = np.nonzero(upper)
        weights = rng.uniform(0.1, 3.0, heads.size)
        graph: Graph = Graph.from_edges(n, heads, tails, weights)
        if np.any(graph.degrees == 0):
            continue
        u: NodeFunction = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        expected: float = edge_scan_cut_size(graph, u)
        for r in (0.0, 0.5, 1.0):
            assert np.isclose(
                cut_size_via_laplacian(graph, u, r),
                expected,
                rtol=1e-10,
                atol=1e-12,
            )


def test_cut_size_via_laplacian_rejects_non_binary() -> None:
    """Non-binary input raises ValueError."""
    import pytest

    with pytest.raises(ValueError, match="requires u"):
        cut_size_via_laplacian(_triangle(), np.array([1.0, 0.5, -1.0]))


def test_cut_summary_orders_statistics() -> None:
    """best >= avg >= least, also for identical sizes."""
    summary: CutSummary = CutSummary.from_sizes([3.0, 5.0, 4.0])
    assert (summary.best, summary.avg, summary.least) == (5.0, 4.0, 3.0)
    repeated: CutSummary = CutSummary.from_sizes([0.1] * 7)
    assert repeated.best == repeated.avg == repeated.least


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
