from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import sparse

if TYPE_CHECKING:
    from collections.abc import Sequence

logger: logging.Logger = logging.getLogger(__name__)

NodeFunction = npt.NDArray[np.float64]
# Aligned with the CSR data array: one value per ordered pair (i, j) in E.
EdgeFunction = npt.NDArray[np.float64]


class Graph(NamedTuple):
    """Undirected weighted simple graph stored as a symmetric CSR matrix.

    `rows[k]` is the row of the k-th stored entry, so `(rows, adjacency.indices)`
    enumerate every ordered pair (i, j) with w_ij > 0.
    """

    adjacency: sparse.csr_matrix
    degrees: NodeFunction
    rows: npt.NDArray[np.int64]
    labels: tuple[int, ...] | None = None
    communities: npt.NDArray[np.int64] | None = None

    @classmethod
    def from_adjacency(
        cls: type[Graph],
        adjacency: sparse.spmatrix | npt.ArrayLike,
        labels: Sequence[int] | None = None,
        communities: npt.ArrayLike | None = None,
    ) -> Graph:
        matrix: sparse.csr_matrix = sparse.csr_matrix(adjacency, dtype=np.float64)
        if matrix.shape[0] != matrix.shape[1]:
            error_msg: str = f"Adjacency must be square, got shape {matrix.shape}"
            raise ValueError(error_msg)

        if matrix.nnz and np.min(matrix.data) < 0:
            error_msg = "Edge weights must be non-negative"
            raise ValueError(error_msg)

        entries: sparse.coo_matrix = matrix.tocoo()
        off_diagonal: npt.NDArray[np.bool_] = (entries.row != entries.col) & (
            entries.data != 0
        )
        matrix = sparse.csr_matrix(
            (
                entries.data[off_diagonal],
                (entries.row[off_diagonal], entries.col[off_diagonal]),
            ),
            shape=entries.shape,
        )
        matrix.sum_duplicates()
        matrix.sort_indices()
        if (matrix != matrix.T).nnz:
            error_msg = "Adjacency must be symmetric"
            raise ValueError(error_msg)

        n: int = matrix.shape[0]
        if labels is not None and len(labels) != n:
            error_msg = f"Expected {n} labels, got {len(labels)}"
            raise ValueError(error_msg)

        community_array: npt.NDArray[np.int64] | None = None
        if communities is not None:
            community_array = np.asarray(communities, dtype=np.int64)
            if community_array.shape != (n,):
                error_msg = f"Expected {n} community labels, got {community_array.shape}"
                raise ValueError(error_msg)

        return cls(
            adjacency=matrix,
            degrees=_row_sums(matrix),
            rows=np.repeat(np.arange(n, dtype=np.int64), np.diff(matrix.indptr)),
            labels=tuple(labels) if labels is not None else None,
            communities=community_array,
        )

    @classmethod
    def from_edges(
        cls: type[Graph],
        n: int,
        heads: npt.ArrayLike,
        tails: npt.ArrayLike,
        weights: npt.ArrayLike | None = None,
        labels: Sequence[int] | None = None,
        communities: npt.ArrayLike | None = None,
    ) -> Graph:
        """Build from undirected edge arrays; repeated pairs are summed."""
        head_array: npt.NDArray[np.int64] = np.asarray(heads, dtype=np.int64)
        tail_array: npt.NDArray[np.int64] = np.asarray(tails, dtype=np.int64)
        weight_array: NodeFunction = (
            np.ones(head_array.size, dtype=np.float64)
            if weights is None
            else np.asarray(weights, dtype=np.float64)
        )
        if not head_array.shape == tail_array.shape == weight_array.shape:
            error_msg: str = "heads, tails and weights must have the same length"
            raise ValueError(error_msg)

        if head_array.size and (
            min(head_array.min(), tail_array.min()) < 0
            or max(head_array.max(), tail_array.max()) >= n
        ):
            error_msg = f"Edge endpoints must lie in [0, {n})"
            raise ValueError(error_msg)

        if np.any(weight_array < 0):
            error_msg = "Edge weights must be non-negative"
            raise ValueError(error_msg)

        keep: npt.NDArray[np.bool_] = (head_array != tail_array) & (weight_array > 0)
        head_array, tail_array, weight_array = (
            head_array[keep],
            tail_array[keep],
            weight_array[keep],
        )
        adjacency: sparse.csr_matrix = sparse.coo_matrix(
            (
                np.concatenate([weight_array, weight_array]),
                (
                    np.concatenate([head_array, tail_array]),
                    np.concatenate([tail_array, head_array]),
                ),
            ),
            shape=(n, n),
        ).tocsr()
        return cls.from_adjacency(adjacency, labels=labels, communities=communities)

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.nnz // 2)

    @property
    def upper_mask(self) -> npt.NDArray[np.bool_]:
        return self.rows < self.adjacency.indices

    @property
    def total_weight(self) -> float:
        """Sum of w_ij over unordered pairs i < j."""
        return float(np.sum(self.adjacency.data[self.upper_mask]))

    @property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.adjacency.data == 1.0))

    def upper_edges(
        self,
    ) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64], NodeFunction]:
        mask: npt.NDArray[np.bool_] = self.upper_mask
        return (
            self.rows[mask],
            self.adjacency.indices[mask].astype(np.int64),
            self.adjacency.data[mask],
        )

    def check_invariants(self) -> None:
        if (self.adjacency != self.adjacency.T).nnz:
            error_msg: str = "Graph adjacency is not symmetric"
            raise ValueError(error_msg)

        if np.any(self.adjacency.diagonal() != 0):
            error_msg = "Graph has self-loops"
            raise ValueError(error_msg)

        if not np.array_equal(self.degrees, _row_sums(self.adjacency)):
            error_msg = "Stored degrees differ from adjacency row sums"
            raise ValueError(error_msg)


class GraphProperties(NamedTuple):
    n: int
    num_edges: int
    total_weight: float
    min_degree: float
    max_degree: float
    mean_degree: float
    isolated_nodes: int


def _row_sums(adjacency: sparse.csr_matrix) -> NodeFunction:
    return np.asarray(adjacency.sum(axis=1), dtype=np.float64).ravel()


def remove_isolated_nodes(graph: Graph) -> Graph:
    """Drop vertices of degree zero, keeping the original labels of the rest."""
    keep: npt.NDArray[np.int64] = np.flatnonzero(graph.degrees > 0)
    if keep.size == 0:
        error_msg: str = "Graph has no edges: no nodes left to cut"
        raise ValueError(error_msg)

    if keep.size == graph.n:
        return graph

    logger.warning("Removing %d isolated nodes", graph.n - keep.size)
    labels: tuple[int, ...] = (
        tuple(graph.labels[i] for i in keep)
        if graph.labels is not None
        else tuple(int(i) for i in keep)
    )
    return Graph.from_adjacency(
        graph.adjacency[keep][:, keep],
        labels=labels,
        communities=(
            graph.communities[keep] if graph.communities is not None else None
        ),
    )


def inner_product_V(  # noqa: N802
    graph: Graph,
    u: NodeFunction,
    v: NodeFunction,
    r: float = 0.0,
) -> float:
    """<u, v>_V = sum_i u_i v_i d_i^r."""
    if not 0.0 <= r <= 1.0:
        error_msg: str = f"r must lie in [0, 1], got {r}"
        raise ValueError(error_msg)

    if r == 0.0:
        return float(np.sum(u * v))

    return float(np.sum(u * v * graph.degrees**r))


def inner_product_E(  # noqa: N802
    graph: Graph,
    phi: EdgeFunction,
    psi: EdgeFunction,
    q: float = 1.0,
) -> float:
    """<phi, psi>_E = 1/2 sum_ij phi_ij psi_ij w_ij^(2q-1)."""
    if not 0.5 <= q <= 1.0:
        error_msg: str = f"q must lie in [1/2, 1], got {q}"
        raise ValueError(error_msg)

    weights: NodeFunction = graph.adjacency.data ** (2.0 * q - 1.0)
    return float(0.5 * np.sum(phi * psi * weights))


def degree_distribution(graph: Graph) -> dict[int, float]:
    """P(j) = |{i : d_i = j}| / n for unweighted graphs."""
    if not graph.is_unweighted:
        error_msg: str = "Degree distribution requires an unweighted graph"
        raise ValueError(error_msg)

    counts: npt.NDArray[np.int64] = np.bincount(graph.degrees.astype(np.int64))
    return {
        int(degree): float(count) / graph.n
        for degree, count in enumerate(counts)
        if count > 0
    }


def graph_properties(graph: Graph) -> GraphProperties:
    degrees: NodeFunction = graph.degrees
    return GraphProperties(
        n=graph.n,
        num_edges=graph.num_edges,
        total_weight=graph.total_weight,
        min_degree=float(degrees.min()) if graph.n else 0.0,
        max_degree=float(degrees.max()) if graph.n else 0.0,
        mean_degree=float(degrees.mean()) if graph.n else 0.0,
        isolated_nodes=int(np.sum(degrees == 0)),
    )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_from_edges_builds_symmetric_graph() -> None:
    """Edges are stored in both directions and degrees are row sums."""
    graph: Graph = Graph.from_edges(3, [0, 1], [1, 2], [1.0, 2.5])
    graph.check_invariants()
    assert graph.n == 3
    assert graph.num_edges == 2
    assert graph.total_weight == 3.5
    assert np.array_equal(graph.degrees, [1.0, 3.5, 2.5])


def test_from_edges_drops_self_loops_and_zero_weights() -> None:
    """Self-loops and zero weights never become edges."""
    graph: Graph = Graph.from_edges(3, [0, 1, 2], [0, 2, 1], [4.0, 0.0, 1.0])
    assert graph.num_edges == 1
    assert graph.adjacency.diagonal().sum() == 0


def test_from_edges_rejects_negative_weight() -> None:
    """Negative weights raise ValueError."""
    import pytest

    with pytest.raises(ValueError, match="non-negative"):
        Graph.from_edges(2, [0], [1], [-1.0])


def test_from_adjacency_rejects_asymmetric_matrix() -> None:
    """A directed adjacency is refused."""
    import pytest

    with pytest.raises(ValueError, match="symmetric"):
        Graph.from_adjacency(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_remove_isolated_nodes_keeps_edges() -> None:
    """One isolated vertex among four is dropped and |E| is unchanged."""
    graph: Graph = Graph.from_edges(4, [0, 1], [1, 3])
    cleaned: Graph = remove_isolated_nodes(graph)
    assert cleaned.n == 3
    assert cleaned.num_edges == 2
    assert cleaned.labels == (0, 1, 3)
    assert np.all(cleaned.degrees > 0)


def test_remove_isolated_nodes_identity_and_empty() -> None:
    """No isolated vertices returns the same graph; an edgeless graph raises."""
    import pytest

    graph: Graph = Graph.from_edges(3, [0, 1], [1, 2])
    assert remove_isolated_nodes(graph) is graph
    with pytest.raises(ValueError, match="no nodes left"):
        remove_isolated_nodes(Graph.from_edges(3, [], []))


def test_inner_products() -> None:
    """V product is Euclidean at r=0 and degree weighted at r=1."""
    graph: Graph = Graph.from_edges(2, [0], [1])
    ones: NodeFunction = np.ones(2)
    assert inner_product_V(graph, ones, ones, r=1.0) == 2.0
    rng: np.random.Generator = np.random.default_rng(0)
    u: NodeFunction = rng.standard_normal(2)
    v: NodeFunction = rng.standard_normal(2)
    assert np.isclose(inner_product_V(graph, u, v), float(np.dot(u, v)), rtol=1e-14)
    assert inner_product_V(graph, u, v, r=0.5) == inner_product_V(graph, v, u, r=0.5)


def test_inner_product_rejects_out_of_range_parameters() -> None:
    """r outside [0, 1] and q outside [1/2, 1] raise ValueError."""
    import pytest

    graph: Graph = Graph.from_edges(2, [0], [1])
    with pytest.raises(ValueError, match="r must lie"):
        inner_product_V(graph, np.ones(2), np.ones(2), r=1.5)
    with pytest.raises(ValueError, match="q must lie"):
        inner_product_E(graph, np.ones(2), np.ones(2), q=0.25)


def test_total_weight_conservation() -> None:
    """sum of degrees equals twice the total edge weight."""
    rng: np.random.Generator = np.random.default_rng(3)
    heads: npt.NDArray[np.int64] = rng.integers(0, 30, 200)
    tails: npt.NDArray[np.int64] = rng.integers(0, 30, 200)
    graph: Graph = Graph.from_edges(30, heads, tails, rng.uniform(0.1, 2.0, 200))
    assert np.isclose(graph.degrees.sum(), 2.0 * graph.total_weight, rtol=1e-12)


def test_degree_distribution() -> None:
    """K4 is 3-regular; the path P3 has two leaves and one middle vertex."""
    import pytest

    complete: Graph = Graph.from_edges(4, [0, 0, 0, 1, 1, 2], [1, 2, 3, 2, 3, 3])
    assert degree_distribution(complete) == {3: 1.0}
    path: Graph = Graph.from_edges(3, [0, 1], [1, 2])
    distribution: dict[int, float] = degree_distribution(path)
    assert distribution == {1: 2 / 3, 2: 1 / 3}
    assert abs(sum(distribution.values()) - 1.0) <= 1e-12
    with pytest.raises(ValueError, match="unweighted"):
        degree_distribution(Graph.from_edges(2, [0], [1], [2.0]))


def test_graph_properties() -> None:
    """Properties report degree extremes and isolated vertices."""
    graph: Graph = Graph.from_edges(5, [0, 0, 1], [1, 2, 2])
    properties: GraphProperties = graph_properties(graph)
    assert properties.n == 5
    assert properties.num_edges == 3
    assert properties.min_degree == 0.0
    assert properties.max_degree == 2.0
    assert properties.isolated_nodes == 2


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
