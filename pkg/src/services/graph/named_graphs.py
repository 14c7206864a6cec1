"""Small deterministic graphs used as fixtures and sanity inputs."""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy import sparse

from src.services.graph.graph import Graph
from src.services.graph.random_stream import StreamTag, counter_rng


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, np.arange(n - 1), np.arange(1, n))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        error_msg: str = f"A cycle needs at least 3 vertices, got {n}"
        raise ValueError(error_msg)

    return Graph.from_edges(n, np.arange(n), (np.arange(n) + 1) % n)


def complete_graph(n: int) -> Graph:
    heads, tails = np.triu_indices(n, k=1)
    return Graph.from_edges(n, heads, tails)


def complete_bipartite_graph(a: int, b: int) -> Graph:
    heads, tails = np.meshgrid(np.arange(a), np.arange(a, a + b), indexing="ij")
    return Graph.from_edges(a + b, heads.ravel(), tails.ravel())


def petersen_graph() -> Graph:
    outer: list[tuple[int, int]] = [(i, (i + 1) % 5) for i in range(5)]
    spokes: list[tuple[int, int]] = [(i, i + 5) for i in range(5)]
    inner: list[tuple[int, int]] = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    heads, tails = zip(*(outer + spokes + inner), strict=True)
    return Graph.from_edges(10, heads, tails)


def random_bipartite_graph(
    left: int,
    right: int,
    p: float,
    seed: int,
) -> Graph:
    """Connected bipartite graph: a zigzag spanning path plus random cross edges.

    Vertices 0..left-1 form one side.
    """
    if left < 1 or right < 1:
        error_msg: str = "Both sides need at least one vertex"
        raise ValueError(error_msg)

    rng: np.random.Generator = counter_rng(seed, StreamTag.GENERATOR, left, right)
    cross: np.ndarray = rng.random((left, right)) < p
    # zigzag L0-R0-L1-R1-...; leftovers hang off the last vertex of the other side
    for i in range(min(left, right)):
        cross[i, i] = True
    for i in range(min(left - 1, right)):
        cross[i + 1, i] = True
    cross[right + 1 :, right - 1] = True
    cross[left - 1, left:] = True

    heads, tails = np.nonzero(cross)
    return Graph.from_edges(left + right, heads, tails + left)


def disjoint_union(*graphs: Graph) -> Graph:
    if not graphs:
        error_msg: str = "At least one graph is required"
        raise ValueError(error_msg)

    return Graph.from_adjacency(sparse.block_diag([g.adjacency for g in graphs]))


def components_count(graph: Graph) -> int:
    from scipy.sparse.csgraph import connected_components

    count, _ = connected_components(graph.adjacency, directed=False)
    return int(count)


def is_bipartite(graph: Graph) -> bool:
    """Two-colouring by breadth-first search over every component."""
    from scipy.sparse.csgraph import breadth_first_order

    colour: np.ndarray = np.full(graph.n, -1, dtype=np.int64)
    for start in range(graph.n):
        if colour[start] >= 0:
            continue
        order, predecessors = breadth_first_order(
            graph.adjacency,
            start,
            directed=False,
            return_predecessors=True,
        )
        colour[start] = 0
        for vertex in order[1:]:
            colour[vertex] = 1 - colour[predecessors[vertex]]

    heads, tails, _ = graph.upper_edges()
    return bool(np.all(colour[heads] != colour[tails]))


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_named_graph_sizes() -> None:
    """Vertex and edge counts of the classic graphs."""
    assert (path_graph(4).n, path_graph(4).num_edges) == (4, 3)
    assert cycle_graph(5).num_edges == 5
    assert complete_graph(6).num_edges == 15
    assert complete_bipartite_graph(2, 3).num_edges == 6
    petersen: Graph = petersen_graph()
    assert petersen.num_edges == 15
    assert np.all(petersen.degrees == 3)


def test_random_bipartite_graph_is_connected_and_bipartite() -> None:
    """The spanning zigzag keeps every realisation connected."""
    for seed in range(10):
        for left, right in ((3, 3), (4, 7), (8, 2)):
            graph: Graph = random_bipartite_graph(left, right, 0.3, seed)
            assert components_count(graph) == 1
            assert is_bipartite(graph)
            assert np.all(graph.degrees > 0)


def test_disjoint_union_and_bipartite_detection() -> None:
    """Union of an even and an odd cycle has two components and is not bipartite."""
    union: Graph = disjoint_union(cycle_graph(4), cycle_graph(5))
    assert union.n == 9
    assert components_count(union) == 2
    assert not is_bipartite(union)
    assert is_bipartite(cycle_graph(6))
    assert not is_bipartite(complete_graph(3))


def test_complete_graph_edges_are_all_pairs() -> None:
    """K4 contains every unordered pair once."""
    heads, tails, _ = complete_graph(4).upper_edges()
    assert set(zip(heads.tolist(), tails.tolist(), strict=True)) == set(
        combinations(range(4), 2),
    )


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
