from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from src.services.graph.cut import BINARY_TOLERANCE, is_binary

if TYPE_CHECKING:
    import numpy.typing as npt

    from src.services.graph.graph import Graph, NodeFunction


class GammaLimit(NamedTuple):
    """Value of the limit functional; `infinite` marks u outside {-1, 1}^n."""

    value: float
    infinite: bool

    @classmethod
    def infinity(cls: type[GammaLimit]) -> GammaLimit:
        return cls(value=math.inf, infinite=True)


def _check_epsilon(epsilon: float) -> None:
    if not epsilon > 0:
        error_msg: str = f"epsilon must be positive, got {epsilon}"
        raise ValueError(error_msg)


def _pair_differences(
    graph: Graph,
    u: NodeFunction,
    sign: float,
) -> npt.NDArray[np.float64]:
    """u_i -/+ u_j over every ordered edge entry."""
    return u[graph.rows] + sign * u[graph.adjacency.indices]


def double_well(x: npt.ArrayLike) -> npt.NDArray[np.float64] | float:
    """W(x) = (x^2 - 1)^2."""
    values: npt.NDArray[np.float64] = (np.asarray(x, dtype=np.float64) ** 2 - 1.0) ** 2
    return float(values) if values.ndim == 0 else values


def _gl_energy(graph: Graph, u: NodeFunction, epsilon: float, sign: float) -> float:
    _check_epsilon(epsilon)
    dirichlet: float = 0.5 * float(
        np.sum(graph.adjacency.data * _pair_differences(graph, u, sign) ** 2),
    )
    return dirichlet + float(np.sum(double_well(u))) / epsilon


def gl_energy(graph: Graph, u: NodeFunction, epsilon: float) -> float:
    """f_eps(u) = 1/2 sum_ij w (u_i - u_j)^2 + 1/eps sum_i W(u_i)."""
    return _gl_energy(graph, u, epsilon, -1.0)


def signless_gl_energy(graph: Graph, u: NodeFunction, epsilon: float) -> float:
    """f_eps+(u) = 1/2 sum_ij w (u_i + u_j)^2 + 1/eps sum_i W(u_i)."""
    return _gl_energy(graph, u, epsilon, 1.0)


def _total_variation(graph: Graph, u: NodeFunction, q: float, sign: float) -> float:
    if not 0.5 <= q <= 1.0:
        error_msg: str = f"q must lie in [1/2, 1], got {q}"
        raise ValueError(error_msg)

    return 0.5 * float(
        np.sum(graph.adjacency.data**q * np.abs(_pair_differences(graph, u, sign))),
    )


def total_variation(graph: Graph, u: NodeFunction, q: float = 1.0) -> float:
    return _total_variation(graph, u, q, -1.0)


def signless_total_variation(graph: Graph, u: NodeFunction, q: float = 1.0) -> float:
    return _total_variation(graph, u, q, 1.0)


def gamma_limit(graph: Graph, u: NodeFunction) -> GammaLimit:
    """f0+(u) = sum_ij w |u_i + u_j| on binary u, +inf elsewhere."""
    if not is_binary(u, BINARY_TOLERANCE):
        return GammaLimit.infinity()

    return GammaLimit(
        value=float(
            np.sum(graph.adjacency.data * np.abs(_pair_differences(graph, u, 1.0))),
        ),
        infinite=False,
    )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_weighted_graph(seed: int, n: int = 10, p: float = 0.4) -> Graph:
    from src.services.graph.graph import Graph

    rng: np.random.Generator = np.random.default_rng(seed)
    heads, tails = np.nonzero(np.triu(rng.random((n, n)) < p, k=1))
    return Graph.from_edges(n, heads, tails, rng.uniform(0.1, 2.0, heads.size))


def test_double_well() -> None:
    """Wells at +-1 and height 1 at the origin."""
    assert double_well(1.0) == 0.0
    assert double_well(-1.0) == 0.0
    assert double_well(0.0) == 1.0
    assert np.array_equal(double_well(np.array([1.0, 0.0])), [0.0, 1.0])


def test_signless_gl_energy_on_k2() -> None:
    """Bipartition has zero energy; the constant has 4."""
    from src.services.graph.graph import Graph

    edge: Graph = Graph.from_edges(2, [0], [1])
    for epsilon in (1.0, 0.1):
        assert signless_gl_energy(edge, np.array([1.0, -1.0]), epsilon) == 0.0
    assert signless_gl_energy(edge, np.array([1.0, 1.0]), 1.0) == 4.0
    assert gl_energy(edge, np.array([1.0, 1.0]), 1.0) == 0.0


def test_gl_energy_rejects_non_positive_epsilon() -> None:
    """epsilon must be positive."""
    import pytest

    from src.services.graph.graph import Graph

    edge: Graph = Graph.from_edges(2, [0], [1])
    with pytest.raises(ValueError, match="positive"):
        signless_gl_energy(edge, np.ones(2), 0.0)


def test_binary_energy_identities() -> None:
    """f_eps+(u) = f0+(u) = 2 sum w - 4 s and TV+ = sum w - 2 s on binary u."""
    from src.services.graph.cut import edge_scan_cut_size

    for seed in range(200):
        graph: Graph = _random_weighted_graph(seed)
        rng: np.random.Generator = np.random.default_rng(seed)
        u: NodeFunction = np.where(rng.random(graph.n) < 0.5, 1.0, -1.0)
        cut: float = edge_scan_cut_size(graph, u)
        ordered_total: float = float(graph.adjacency.data.sum())
        limit: GammaLimit = gamma_limit(graph, u)
        assert not limit.infinite
        for epsilon in (1.0, 0.1, 0.01):
            energy: float = signless_gl_energy(graph, u, epsilon)
            assert np.isclose(energy, limit.value, rtol=1e-10, atol=1e-10)
            assert np.isclose(energy, 2 * ordered_total - 4 * cut, rtol=1e-10, atol=1e-10)
        assert np.isclose(
            signless_total_variation(graph, u),
            ordered_total - 2 * cut,
            rtol=1e-10,
            atol=1e-10,
        )
        assert np.isclose(total_variation(graph, u), 2 * cut, rtol=1e-10, atol=1e-10)
        assert np.isclose(limit.value, 2 * signless_total_variation(graph, u), rtol=1e-12)


def test_total_variation_examples() -> None:
    """Constants have no variation; K2 bipartition has TV = 2 and TV+ = 0."""
    from src.services.graph.graph import Graph

    edge: Graph = Graph.from_edges(2, [0], [1])
    assert total_variation(edge, np.full(2, 0.3)) == 0.0
    assert total_variation(edge, np.array([1.0, -1.0])) == 2.0
    assert signless_total_variation(edge, np.array([1.0, -1.0])) == 0.0


def test_gamma_limit_examples() -> None:
    """Non-binary input is infinite; the C4 bipartition reaches zero."""
    from src.services.graph.named_graphs import cycle_graph

    cycle: Graph = cycle_graph(4)
    assert gamma_limit(cycle, np.full(4, 0.5)).infinite
    assert gamma_limit(cycle, np.full(4, 0.5)).value == math.inf
    assert gamma_limit(cycle, np.array([1.0, -1.0, 1.0, -1.0])) == GammaLimit(0.0, False)


def test_energy_dominates_dirichlet_part() -> None:
    """f_eps+(u) >= ||grad+ u||_E^2 for any u."""
    from src.services.graph.graph import inner_product_E
    from src.services.operators.laplacian import signless_gradient

    graph: Graph = _random_weighted_graph(1, n=12)
    rng: np.random.Generator = np.random.default_rng(1)
    for _ in range(20):
        u: NodeFunction = rng.uniform(-1.5, 1.5, graph.n)
        phi = signless_gradient(graph, u)
        assert signless_gl_energy(graph, u, 0.5) >= inner_product_E(graph, phi, phi) - 1e-12


def test_limit_minimiser_is_maximum_cut() -> None:
    """argmin of f0+ over {-1, 1}^n coincides with argmax of the cut size."""
    from itertools import product

    from src.services.graph.cut import edge_scan_cut_size

    for seed in range(3):
        graph: Graph = _random_weighted_graph(seed, n=10, p=0.5)
        energies: list[float] = []
        cuts: list[float] = []
        for signs in product((1.0, -1.0), repeat=graph.n):
            u: NodeFunction = np.array(signs)
            energies.append(gamma_limit(graph, u).value)
            cuts.append(edge_scan_cut_size(graph, u))
        energy_array = np.array(energies)
        cut_array = np.array(cuts)
        minimisers = set(np.flatnonzero(np.isclose(energy_array, energy_array.min())))
        maximisers = set(np.flatnonzero(np.isclose(cut_array, cut_array.max())))
        assert minimisers == maximisers


def test_gamma_trend_towards_limit() -> None:
    """min f_eps+ over perturbed binary candidates rises toward min f0+ as eps shrinks."""
    from itertools import product

    graph: Graph = _random_weighted_graph(7, n=6, p=0.6)
    rng: np.random.Generator = np.random.default_rng(7)
    binaries: list[NodeFunction] = [
        np.array(signs) for signs in product((1.0, -1.0), repeat=graph.n)
    ]
    directions: list[NodeFunction] = [rng.standard_normal(graph.n) for _ in range(8)]
    candidates: list[NodeFunction] = [
        b + delta * d
        for b in binaries
        for d in directions
        for delta in np.linspace(-0.5, 0.5, 11)
    ]
    limit_minimum: float = min(gamma_limit(graph, b).value for b in binaries)
    gaps: list[float] = []
    for epsilon in (1.0, 0.1, 0.01):
        minimum: float = min(signless_gl_energy(graph, c, epsilon) for c in candidates)
        assert minimum <= limit_minimum + 1e-12
        gaps.append(limit_minimum - minimum)
    assert gaps[0] >= gaps[1] >= gaps[2] >= 0.0


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
