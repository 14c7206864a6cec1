"""Erdos-Renyi, modular and reweighted random graphs from counter-based streams.

Edge decisions compare raw 53-bit integers against integer thresholds, so a
(seed, parameters) pair yields the same graph on every platform.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from src.services.graph.graph import Graph
from src.services.graph.random_stream import StreamTag, counter_rng

if TYPE_CHECKING:
    import numpy.typing as npt

logger: logging.Logger = logging.getLogger(__name__)

PAIR_CHUNK: int = 1 << 22
MANTISSA_BITS: int = 53


def _probability_threshold(p: float) -> np.uint64:
    """floor(p 2^53): a 53-bit draw below it happens with probability p."""
    return np.uint64(math.floor(p * (1 << MANTISSA_BITS)))


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        error_msg: str = f"{name} must lie in [0, 1], got {value}"
        raise ValueError(error_msg)


def _sample_pairs(
    n: int,
    rng: np.random.Generator,
    thresholds: npt.NDArray[np.uint64],
    groups: npt.NDArray[np.int64],
) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Keep each pair i < j, visited row by row, when its draw is below its threshold.

    `thresholds[a, b]` applies to pairs between groups a and b.
    """
    total: int = n * (n - 1) // 2
    rows: npt.NDArray[np.int64] = np.arange(n, dtype=np.int64)
    row_starts: npt.NDArray[np.int64] = rows * n - rows * (rows + 1) // 2
    heads: list[npt.NDArray[np.int64]] = []
    tails: list[npt.NDArray[np.int64]] = []
    shift: np.uint64 = np.uint64(64 - MANTISSA_BITS)
    for offset in range(0, total, PAIR_CHUNK):
        size: int = min(PAIR_CHUNK, total - offset)
        draws: npt.NDArray[np.uint64] = rng.bit_generator.random_raw(size) >> shift
        flat: npt.NDArray[np.int64] = np.arange(offset, offset + size, dtype=np.int64)
        i: npt.NDArray[np.int64] = np.searchsorted(row_starts, flat, side="right") - 1
        j: npt.NDArray[np.int64] = flat - row_starts[i] + i + 1
        keep: npt.NDArray[np.bool_] = draws < thresholds[groups[i], groups[j]]
        heads.append(i[keep])
        tails.append(j[keep])

    if not heads:
        empty: npt.NDArray[np.int64] = np.empty(0, dtype=np.int64)
        return empty, empty

    return np.concatenate(heads), np.concatenate(tails)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): every pair present independently with probability p, unit weights.

    Isolated nodes are kept; callers decide whether to remove them.
    """
    if n < 1:
        error_msg: str = f"n must be at least 1, got {n}"
        raise ValueError(error_msg)

    _check_probability("p", p)
    rng: np.random.Generator = counter_rng(seed, StreamTag.GENERATOR)
    heads, tails = _sample_pairs(
        n,
        rng,
        np.full((1, 1), _probability_threshold(p), dtype=np.uint64),
        np.zeros(n, dtype=np.int64),
    )
    graph: Graph = Graph.from_edges(n, heads, tails)
    logger.debug("Generated G(%d, %g) with %d edges", n, p, graph.num_edges)
    return graph


def community_sizes(n: int, c: int) -> list[int]:
    """Near-equal sizes; the first n mod c communities get one extra node."""
    base, extra = divmod(n, c)
    return [base + 1 if index < extra else base for index in range(c)]


def modular_probabilities(
    n: int,
    c: int,
    p: float,
    r: float,
) -> tuple[float, float]:
    """(p_in, p_out) giving p n(n-1)/2 expected edges, a fraction r of them intra-community."""
    sizes: list[int] = community_sizes(n, c)
    pairs: int = n * (n - 1) // 2
    intra_pairs: int = sum(size * (size - 1) // 2 for size in sizes)
    inter_pairs: int = pairs - intra_pairs
    if inter_pairs == 0:
        return p, 0.0

    expected_edges: float = p * pairs
    p_in: float = min(1.0, r * expected_edges / intra_pairs) if intra_pairs else 0.0
    p_out: float = min(1.0, (1.0 - r) * expected_edges / inter_pairs)
    return p_in, p_out


def modular(n: int, c: int, p: float, r: float, seed: int) -> Graph:
    """R(n, c, p, r): c near-equal communities, expected edges p n(n-1)/2, intra share r."""
    if not 1 <= c <= n:
        error_msg: str = f"Community count must lie in [1, n={n}], got {c}"
        raise ValueError(error_msg)

    if not 0.0 < p <= 1.0:
        error_msg = f"p must lie in (0, 1], got {p}"
        raise ValueError(error_msg)

    _check_probability("r", r)
    p_in, p_out = modular_probabilities(n, c, p, r)
    communities: npt.NDArray[np.int64] = np.repeat(
        np.arange(c, dtype=np.int64),
        community_sizes(n, c),
    )
    thresholds: npt.NDArray[np.uint64] = np.full(
        (c, c),
        _probability_threshold(p_out),
        dtype=np.uint64,
    )
    np.fill_diagonal(thresholds, _probability_threshold(p_in))
    rng: np.random.Generator = counter_rng(seed, StreamTag.GENERATOR)
    heads, tails = _sample_pairs(n, rng, thresholds, communities)
    graph: Graph = Graph.from_edges(n, heads, tails, communities=communities)
    logger.debug(
        "Generated R(%d, %d, %g, %g) with %d edges (p_in=%.4g, p_out=%.4g)",
        n,
        c,
        p,
        r,
        graph.num_edges,
        p_in,
        p_out,
    )
    return graph


def reweight(graph: Graph, lo: float, hi: float, seed: int) -> Graph:
    """Multiply each undirected edge by one uniform draw from [lo, hi]; zero weights vanish."""
    if not 0.0 <= lo <= hi or hi <= 0.0:
        error_msg: str = f"Weight range needs 0 <= lo <= hi and hi > 0, got [{lo}, {hi}]"
        raise ValueError(error_msg)

    heads, tails, weights = graph.upper_edges()
    rng: np.random.Generator = counter_rng(seed, StreamTag.REWEIGHT)
    factors: npt.NDArray[np.float64] = (
        np.full(weights.size, lo) if lo == hi else rng.uniform(lo, hi, weights.size)
    )
    return Graph.from_edges(
        graph.n,
        heads,
        tails,
        weights * factors,
        labels=graph.labels,
        communities=graph.communities,
    )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_erdos_renyi_extremes() -> None:
    """p = 0 is empty and p = 1 is complete."""
    assert erdos_renyi(10, 0.0, seed=1).num_edges == 0
    complete: Graph = erdos_renyi(10, 1.0, seed=1)
    assert complete.num_edges == 45
    complete.check_invariants()
    assert erdos_renyi(1, 0.5, seed=0).num_edges == 0


def test_erdos_renyi_is_deterministic() -> None:
    """Same seed, same graph; a different seed gives a different one."""
    first: Graph = erdos_renyi(200, 0.05, seed=9)
    again: Graph = erdos_renyi(200, 0.05, seed=9)
    assert (first.adjacency != again.adjacency).nnz == 0
    other: Graph = erdos_renyi(200, 0.05, seed=10)
    assert (first.adjacency != other.adjacency).nnz > 0


def test_erdos_renyi_pairs_cover_upper_triangle() -> None:
    """Chunked enumeration visits every pair exactly once."""
    from unittest.mock import patch

    with patch(f"{__name__}.PAIR_CHUNK", 7):
        chunked: Graph = erdos_renyi(30, 1.0, seed=0)
    assert chunked.num_edges == 30 * 29 // 2
    with patch(f"{__name__}.PAIR_CHUNK", 7):
        sampled: Graph = erdos_renyi(40, 0.3, seed=4)
    assert (sampled.adjacency != erdos_renyi(40, 0.3, seed=4).adjacency).nnz == 0


def test_erdos_renyi_edge_count_in_band() -> None:
    """G(1000, 0.01) lands within four standard deviations of 4995 edges."""
    graph: Graph = erdos_renyi(1000, 0.01, seed=7)
    sigma: float = math.sqrt(4995 * 0.99)
    assert abs(graph.num_edges - 4995) <= 4 * sigma


def test_community_sizes() -> None:
    """The remainder goes to the first communities."""
    assert community_sizes(10, 3) == [4, 3, 3]
    assert community_sizes(2500, 2) == [1250, 1250]


def test_modular_single_community_and_separated() -> None:
    """c = 1 ignores r; r = 1 with two communities has no inter-community edges."""
    from src.services.graph.named_graphs import components_count

    assert modular_probabilities(50, 1, 0.2, 0.3) == (0.2, 0.0)
    separated: Graph = modular(60, 2, 0.3, 1.0, seed=3)
    assert separated.communities is not None
    heads, tails, _ = separated.upper_edges()
    assert np.all(separated.communities[heads] == separated.communities[tails])
    assert components_count(separated) >= 2


def test_modular_expected_edges() -> None:
    """p_in and p_out reproduce p n(n-1)/2 expected edges with intra share r."""
    p_in, p_out = modular_probabilities(2500, 2, 0.009, 0.8)
    intra_pairs: int = 2 * 1250 * 1249 // 2
    inter_pairs: int = 1250 * 1250
    expected: float = 0.009 * 2500 * 2499 / 2
    assert np.isclose(p_in * intra_pairs + p_out * inter_pairs, expected)
    assert np.isclose(p_in * intra_pairs / expected, 0.8)


def test_modular_rejects_bad_parameters() -> None:
    """c must lie in [1, n] and p in (0, 1]."""
    import pytest

    with pytest.raises(ValueError, match="Community count"):
        modular(5, 6, 0.5, 0.5, seed=0)
    with pytest.raises(ValueError, match="p must"):
        modular(5, 2, 0.0, 0.5, seed=0)
    with pytest.raises(ValueError, match="r must"):
        modular(5, 2, 0.5, 1.5, seed=0)


def test_reweight() -> None:
    """Weights scale within range, stay symmetric, and [1, 1] is the identity."""
    import pytest

    base: Graph = erdos_renyi(80, 0.1, seed=2)
    same: Graph = reweight(base, 1.0, 1.0, seed=5)
    assert (same.adjacency != base.adjacency).nnz == 0
    weighted: Graph = reweight(base, 0.0, 2.0, seed=5)
    weighted.check_invariants()
    assert np.all(weighted.adjacency.data > 0.0)
    assert np.all(weighted.adjacency.data <= 2.0)
    assert weighted.num_edges <= base.num_edges
    again: Graph = reweight(base, 0.0, 2.0, seed=5)
    assert np.array_equal(again.adjacency.data, weighted.adjacency.data)
    with pytest.raises(ValueError, match="Weight range"):
        reweight(base, 2.0, 1.0, seed=0)


def integration_test_erdos_renyi_edge_statistics() -> None:
    """Over 100 seeds G(1000, 0.01) averages within 1% of 4995 edges; 4919 and 4939 sit in 4 sd."""
    counts: npt.NDArray[np.float64] = np.array(
        [erdos_renyi(1000, 0.01, seed=seed).num_edges for seed in range(100)],
        dtype=np.float64,
    )
    assert abs(counts.mean() - 4995) <= 0.01 * 4995
    sd: float = float(counts.std(ddof=1))
    for observed in (4919, 4939):
        assert abs(observed - counts.mean()) <= 4 * sd


def integration_test_modular_intra_fraction() -> None:
    """R(2500, 2, 0.009, 0.8) keeps about 80% of its edges inside communities."""
    fractions: list[float] = []
    for seed in range(20):
        graph: Graph = modular(2500, 2, 0.009, 0.8, seed=seed)
        assert graph.communities is not None
        heads, tails, _ = graph.upper_edges()
        fractions.append(
            float(np.mean(graph.communities[heads] == graph.communities[tails])),
        )
    assert abs(np.mean(fractions) - 0.8) <= 0.01


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
