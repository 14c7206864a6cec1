from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from src.services.graph.cut import Cut, CutSummary, edge_scan_cut_size, is_binary
from src.services.graph.random_stream import StreamTag, counter_rng

if TYPE_CHECKING:
    from src.services.graph.graph import Graph, NodeFunction

logger: logging.Logger = logging.getLogger(__name__)

GAIN_TOLERANCE: float = 1e-12


def random_cut_baseline(graph: Graph, runs: int, seed: int) -> CutSummary:
    """Best / average / least edge-scan cut over uniform random partitions."""
    if runs < 1:
        error_msg: str = f"runs must be at least 1, got {runs}"
        raise ValueError(error_msg)

    sizes: list[float] = []
    for run_index in range(runs):
        rng: np.random.Generator = counter_rng(seed, StreamTag.BASELINE, run_index)
        side: NodeFunction = np.where(rng.integers(0, 2, size=graph.n) == 1, 1.0, -1.0)
        sizes.append(edge_scan_cut_size(graph, side))

    summary: CutSummary = CutSummary.from_sizes(sizes)
    logger.debug(
        "Random baseline over %d partitions: best=%.6g avg=%.6g",
        runs,
        summary.best,
        summary.avg,
    )
    return summary


def greedy_local_search(graph: Graph, start: NodeFunction) -> Cut:
    """Flip the vertex with the largest gain until no single flip enlarges the cut.

    Flipping v gains x_v (W x)_v: its same-side edges start crossing and its
    crossing edges stop.
    """
    if start.shape != (graph.n,) or not is_binary(start):
        error_msg: str = "Local search needs a start partition in {-1, 1}^n"
        raise ValueError(error_msg)

    side: NodeFunction = np.where(start > 0, 1.0, -1.0)
    neighbour_sum: NodeFunction = graph.adjacency @ side
    tolerance: float = GAIN_TOLERANCE * max(1.0, graph.total_weight)
    flips: int = 0
    while True:
        gains: NodeFunction = side * neighbour_sum
        vertex: int = int(np.argmax(gains))
        if gains[vertex] <= tolerance:
            break

        row: NodeFunction = graph.adjacency[vertex].toarray().ravel()
        neighbour_sum -= 2.0 * side[vertex] * row
        side[vertex] = -side[vertex]
        flips += 1

    logger.debug("Local search finished after %d flips", flips)
    return Cut(side=side, size=edge_scan_cut_size(graph, side))


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_random_baseline_on_empty_graph() -> None:
    """Every partition of an edgeless graph cuts nothing."""
    from src.services.graph.graph import Graph as GraphModel

    summary: CutSummary = random_cut_baseline(GraphModel.from_edges(5, [], []), 10, seed=0)
    assert summary.best == summary.avg == summary.least == 0.0


def test_random_baseline_average_is_half_the_weight() -> None:
    """With many runs the average approaches half the total weight."""
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    summary: CutSummary = random_cut_baseline(graph, 4000, seed=3)
    assert abs(summary.avg - graph.total_weight / 2.0) <= 0.25
    assert summary.best >= summary.avg >= summary.least
    assert random_cut_baseline(graph, 20, seed=3).sizes == summary.sizes[:20]


def test_random_baseline_never_beats_oracle() -> None:
    """On G(12, 0.5) the baseline best is bounded by the exact optimum."""
    from src.services.generators.random_graphs import erdos_renyi
    from src.services.oracle.brute_force import brute_force_maxcut

    for seed in range(3):
        graph: Graph = erdos_renyi(12, 0.5, seed=seed)
        assert random_cut_baseline(graph, 50, seed=seed).best <= (
            brute_force_maxcut(graph).optimum
        )


def test_random_baseline_rejects_zero_runs() -> None:
    """runs must be positive."""
    import pytest

    from src.services.graph.named_graphs import path_graph

    with pytest.raises(ValueError, match="runs"):
        random_cut_baseline(path_graph(3), 0, seed=0)


def test_greedy_local_search_examples() -> None:
    """K2 from all +1 needs one flip; an optimal cut is left alone."""
    from src.services.graph.named_graphs import complete_bipartite_graph, complete_graph

    pair: Cut = greedy_local_search(complete_graph(2), np.ones(2))
    assert pair.size == 1.0
    graph: Graph = complete_bipartite_graph(2, 3)
    optimal: NodeFunction = np.array([1.0, 1.0, -1.0, -1.0, -1.0])
    unchanged: Cut = greedy_local_search(graph, optimal)
    assert np.array_equal(unchanged.side, optimal)
    assert unchanged.size == 6.0


def test_greedy_local_search_is_single_flip_optimal() -> None:
    """No flip improves the result, which holds at least half the weight."""
    from src.services.generators.random_graphs import erdos_renyi, reweight

    for seed in range(10):
        graph: Graph = reweight(erdos_renyi(40, 0.2, seed=seed), 0.0, 2.0, seed=seed)
        start: NodeFunction = np.ones(graph.n)
        result: Cut = greedy_local_search(graph, start)
        assert result.size >= edge_scan_cut_size(graph, start)
        assert result.size >= graph.total_weight / 2.0 - 1e-9
        for vertex in range(graph.n):
            flipped: NodeFunction = result.side.copy()
            flipped[vertex] = -flipped[vertex]
            assert edge_scan_cut_size(graph, flipped) <= result.size + 1e-9


def test_greedy_local_search_never_lowers_mbo_cut() -> None:
    """Polishing an MBO+ partition keeps or improves its size."""
    from src.services.graph.named_graphs import petersen_graph
    from src.services.mbo.config import MboConfig
    from src.services.mbo.mbo import MboTrace, mbo_run

    graph: Graph = petersen_graph()
    mu0: NodeFunction = np.where(np.arange(graph.n) % 3 == 0, 1.0, -1.0)
    trace: MboTrace = mbo_run(graph, MboConfig(K=graph.n), mu0)
    polished: Cut = greedy_local_search(graph, trace.best_partition)
    assert polished.size >= trace.best_cut_size


def test_greedy_local_search_rejects_non_binary_start() -> None:
    """Starts must be sign vectors of the right length."""
    import pytest

    from src.services.graph.named_graphs import path_graph

    with pytest.raises(ValueError, match="start partition"):
        greedy_local_search(path_graph(3), np.array([1.0, 0.5, -1.0]))
    with pytest.raises(ValueError, match="start partition"):
        greedy_local_search(path_graph(3), np.ones(2))


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
