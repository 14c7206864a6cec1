"""Exact Max-Cut by exhaustive enumeration for small graphs.

One vertex is pinned to +1 since a cut and its complement have the same size,
leaving 2^(n-1) patterns. The remaining vertices split into prefix bits, one
task per prefix, and suffix bits, evaluated together as a quadratic form over
a precomputed sign table.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import anyio
import numpy as np
from anyio import CapacityLimiter

from src.services.graph.cut import edge_scan_cut_size

if TYPE_CHECKING:
    import numpy.typing as npt

    from src.services.graph.graph import Graph, NodeFunction

logger: logging.Logger = logging.getLogger(__name__)

ORACLE_CAP: int = 24
SUFFIX_BITS: int = 14
DEFAULT_WORKERS: int = 4


class OracleCapExceededError(ValueError):
    def __init__(self, n: int, cap: int) -> None:
        self.n: int = n
        self.cap: int = cap
        super().__init__(
            f"Exhaustive Max-Cut is limited to n <= {cap} vertices, got n={n}",
        )


class OracleResult(NamedTuple):
    optimum: float
    witness: NodeFunction
    enumerated: int


class _BlockBest(NamedTuple):
    value: float
    suffix: int


def _sign_table(bits: int) -> npt.NDArray[np.float64]:
    """Row s holds +1 / -1 for the bits of s, most significant first; bit 1 is -1."""
    patterns: npt.NDArray[np.int64] = np.arange(1 << bits, dtype=np.int64)
    shifts: npt.NDArray[np.int64] = np.arange(bits - 1, -1, -1, dtype=np.int64)
    return 1.0 - 2.0 * ((patterns[:, None] >> shifts[None, :]) & 1).astype(np.float64)


class _Enumerator:
    """Evaluates every suffix pattern for one fixed prefix at a time."""

    def __init__(self, weights: npt.NDArray[np.float64], fixed_vertex: int) -> None:
        n: int = weights.shape[0]
        free: list[int] = [vertex for vertex in range(n) if vertex != fixed_vertex]
        self.suffix_bits: int = min(len(free), SUFFIX_BITS)
        self.prefix_bits: int = len(free) - self.suffix_bits
        self.known: list[int] = [fixed_vertex, *free[: self.prefix_bits]]
        self.suffix: list[int] = free[self.prefix_bits :]
        self.half_total: float = float(weights.sum()) / 2.0

        self.suffix_signs: npt.NDArray[np.float64] = _sign_table(self.suffix_bits)
        suffix_block: npt.NDArray[np.float64] = weights[np.ix_(self.suffix, self.suffix)]
        self.suffix_energy: npt.NDArray[np.float64] = np.einsum(
            "sk,kl,sl->s",
            self.suffix_signs,
            suffix_block,
            self.suffix_signs,
        )
        self.coupling: npt.NDArray[np.float64] = weights[np.ix_(self.suffix, self.known)]
        self.known_block: npt.NDArray[np.float64] = weights[np.ix_(self.known, self.known)]
        self.prefix_signs: npt.NDArray[np.float64] = _sign_table(self.prefix_bits)

    @property
    def prefix_count(self) -> int:
        return 1 << self.prefix_bits

    def known_signs(self, prefix: int) -> npt.NDArray[np.float64]:
        return np.concatenate([[1.0], self.prefix_signs[prefix]])

    def best_in_block(self, prefix: int) -> _BlockBest:
        """Largest cut among patterns sharing `prefix`; ties go to the smallest suffix."""
        x_known: npt.NDArray[np.float64] = self.known_signs(prefix)
        # x^T W x split over known and suffix vertices
        quadratic: npt.NDArray[np.float64] = (
            self.suffix_energy
            + 2.0 * (self.suffix_signs @ (self.coupling @ x_known))
            + float(x_known @ self.known_block @ x_known)
        )
        cuts: npt.NDArray[np.float64] = (self.half_total - quadratic / 2.0) / 2.0
        suffix: int = int(np.argmax(cuts))
        return _BlockBest(value=float(cuts[suffix]), suffix=suffix)

    def witness(self, n: int, prefix: int, suffix: int) -> NodeFunction:
        side: NodeFunction = np.empty(n, dtype=np.float64)
        side[self.known] = self.known_signs(prefix)
        side[self.suffix] = self.suffix_signs[suffix]
        return side


async def _evaluate_blocks(enumerator: _Enumerator, workers: int) -> list[_BlockBest]:
    slots: list[_BlockBest | None] = [None] * enumerator.prefix_count
    limiter: CapacityLimiter = CapacityLimiter(workers)

    async def evaluate(prefix: int) -> None:
        slots[prefix] = await anyio.to_thread.run_sync(
            enumerator.best_in_block,
            prefix,
            limiter=limiter,
        )

    async with anyio.create_task_group() as task_group:
        for prefix in range(enumerator.prefix_count):
            task_group.start_soon(evaluate, prefix)

    return [block for block in slots if block is not None]


def brute_force_maxcut(
    graph: Graph,
    cap: int = ORACLE_CAP,
    fixed_vertex: int = 0,
    workers: int = DEFAULT_WORKERS,
) -> OracleResult:
    """Exact maximum cut over all 2^(n-1) patterns with `fixed_vertex` on the +1 side.

    Among equal cuts the witness is the first pattern in enumeration order,
    reading the free vertices in index order with -1 after +1.
    """
    if graph.n > cap:
        raise OracleCapExceededError(graph.n, cap)

    if not 0 <= fixed_vertex < graph.n:
        error_msg: str = f"fixed_vertex must lie in [0, {graph.n}), got {fixed_vertex}"
        raise ValueError(error_msg)

    enumerator: _Enumerator = _Enumerator(graph.adjacency.toarray(), fixed_vertex)
    blocks: list[_BlockBest] = anyio.run(_evaluate_blocks, enumerator, max(1, workers))

    best_prefix: int = 0
    for prefix, block in enumerate(blocks):
        if block.value > blocks[best_prefix].value:
            best_prefix = prefix

    witness: NodeFunction = enumerator.witness(
        graph.n,
        best_prefix,
        blocks[best_prefix].suffix,
    )
    optimum: float = edge_scan_cut_size(graph, witness)
    enumerated: int = 1 << (graph.n - 1)
    logger.info(
        "Exhaustive Max-Cut on n=%d: optimum=%.10g over %d patterns",
        graph.n,
        optimum,
        enumerated,
    )
    return OracleResult(optimum=optimum, witness=witness, enumerated=enumerated)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_brute_force_small_graphs() -> None:
    """K3 -> 2, K_{2,2} -> 4, C5 -> 4 and the Petersen graph -> 12."""
    from src.services.graph.named_graphs import (
        complete_bipartite_graph,
        complete_graph,
        cycle_graph,
        petersen_graph,
    )

    assert brute_force_maxcut(complete_graph(3)).optimum == 2.0
    assert brute_force_maxcut(complete_bipartite_graph(2, 2)).optimum == 4.0
    assert brute_force_maxcut(cycle_graph(5)).optimum == 4.0
    petersen: OracleResult = brute_force_maxcut(petersen_graph())
    assert petersen.optimum == 12.0
    assert petersen.enumerated == 2**9


def test_witness_matches_optimum_and_pins_vertex() -> None:
    """The witness realises the optimum and keeps the pinned vertex on +1."""
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    for fixed_vertex in (0, 3):
        result: OracleResult = brute_force_maxcut(graph, fixed_vertex=fixed_vertex)
        assert result.witness[fixed_vertex] == 1.0
        assert set(np.unique(result.witness)) <= {-1.0, 1.0}
        assert edge_scan_cut_size(graph, result.witness) == result.optimum


def test_fixed_vertex_does_not_change_optimum() -> None:
    """Pinning vertex 1 instead of vertex 0 gives the same optimum."""
    from src.services.generators.random_graphs import erdos_renyi, reweight

    for seed in range(5):
        graph: Graph = reweight(erdos_renyi(11, 0.5, seed=seed), 0.5, 2.0, seed=seed)
        pinned_first: float = brute_force_maxcut(graph, fixed_vertex=0).optimum
        pinned_second: float = brute_force_maxcut(graph, fixed_vertex=1).optimum
        assert np.isclose(pinned_first, pinned_second, rtol=1e-12)


def test_prefix_blocks_agree_with_itertools() -> None:
    """Forcing several prefix blocks and workers still finds the exact optimum."""
    from itertools import product
    from unittest.mock import patch

    from src.services.generators.random_graphs import erdos_renyi

    for seed in range(4):
        graph: Graph = erdos_renyi(9, 0.5, seed=seed)
        expected: float = max(
            edge_scan_cut_size(graph, np.array([1.0, *signs]))
            for signs in product((1.0, -1.0), repeat=graph.n - 1)
        )
        with patch(f"{__name__}.SUFFIX_BITS", 3):
            assert brute_force_maxcut(graph, workers=3).optimum == expected
        assert brute_force_maxcut(graph).optimum == expected


def test_ties_go_to_first_pattern() -> None:
    """On an edgeless graph every pattern ties and the all-(+1) witness wins."""
    from unittest.mock import patch

    from src.services.graph.graph import Graph as GraphModel

    empty: Graph = GraphModel.from_edges(6, [], [])
    with patch(f"{__name__}.SUFFIX_BITS", 2):
        result: OracleResult = brute_force_maxcut(empty)
    assert result.optimum == 0.0
    assert np.all(result.witness == 1.0)


def test_single_vertex_and_cap() -> None:
    """n = 1 enumerates one pattern; n above the cap is refused."""
    import pytest

    from src.services.graph.graph import Graph as GraphModel
    from src.services.graph.named_graphs import path_graph

    single: OracleResult = brute_force_maxcut(GraphModel.from_edges(1, [], []))
    assert single.optimum == 0.0
    assert single.enumerated == 1
    with pytest.raises(OracleCapExceededError, match="n <= 5"):
        brute_force_maxcut(path_graph(6), cap=5)


def test_bipartite_optimum_is_edge_count() -> None:
    """Connected bipartite graphs are cut completely."""
    from src.services.graph.named_graphs import random_bipartite_graph

    for seed in range(3):
        graph: Graph = random_bipartite_graph(6, 7, 0.3, seed=seed)
        assert brute_force_maxcut(graph).optimum == graph.num_edges


def integration_test_mbo_is_close_to_exact_optimum() -> None:
    """Best-of-50 spectral MBO+ with K = n reaches 95% of the optimum on G(12, 0.5) on average."""
    from src.services.generators.random_graphs import erdos_renyi
    from src.services.graph.graph import remove_isolated_nodes
    from src.services.mbo.config import MboConfig
    from src.services.mbo.multi_run import MultiRunSummary, multi_run
    from src.services.oracle.baselines import random_cut_baseline

    ratios: list[float] = []
    beats_random_best: int = 0
    for seed in range(30):
        graph: Graph = remove_isolated_nodes(erdos_renyi(12, 0.5, seed=seed))
        optimum: float = brute_force_maxcut(graph).optimum
        summary: MultiRunSummary = multi_run(
            graph,
            MboConfig(K=graph.n, seed=seed),
            runs=50,
        )
        assert summary.best <= optimum
        beats_random_best += summary.best > random_cut_baseline(graph, runs=50, seed=seed).best
        ratios.append(summary.best / optimum)
    assert np.mean(ratios) >= 0.95
    assert beats_random_best >= 27


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
