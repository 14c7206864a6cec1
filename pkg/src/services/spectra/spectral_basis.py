from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from src.services.graph.random_stream import StreamTag, counter_rng
from src.services.operators.laplacian import (
    degree_power,
    symmetric_dense_matrix,
    symmetric_form,
)
from src.services.operators.operator_kind import (
    L0_PLUS,
    L1_PLUS,
    LS,
    LS_PLUS,
    OperatorKind,
)
from src.services.spectra.lanczos import (
    DEFAULT_MAX_RESTARTS,
    DEFAULT_TOLERANCE,
    LanczosResult,
    block_lanczos,
)

if TYPE_CHECKING:
    import numpy.typing as npt

    from src.services.graph.graph import Graph, NodeFunction

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_DENSE_CAP: int = 5000
ZERO_MODE_TOLERANCE: float = 1e-8
POWER_ITERATIONS: int = 20


class DenseCapExceededError(ValueError):
    pass


class SpectralBasis(NamedTuple):
    """Eigenpairs in ascending order; `phis[:, k]` is the k-th eigenfunction.

    `inner_product_r` names the V inner product the columns are orthonormal in;
    None means Euclidean.
    """

    operator: OperatorKind
    lambdas: npt.NDArray[np.float64]
    phis: npt.NDArray[np.float64]
    inner_product_r: float | None

    @property
    def K(self) -> int:  # noqa: N802
        return int(self.lambdas.size)

    @property
    def largest_eigenvalue(self) -> float:
        return float(self.lambdas[-1])

    def weights(self, graph: Graph) -> NodeFunction:
        if self.inner_product_r is None:
            return np.ones(graph.n, dtype=np.float64)

        return degree_power(graph, self.inner_product_r)

    def coefficients(self, graph: Graph, u: NodeFunction) -> NodeFunction:
        """<phi_k, u> in the basis inner product."""
        return self.phis.T @ (self.weights(graph) * u)

    def truncate(self, K: int) -> SpectralBasis:  # noqa: N803
        if not 1 <= K <= self.K:
            error_msg: str = f"Cannot truncate a basis of {self.K} pairs to K={K}"
            raise ValueError(error_msg)

        return self._replace(lambdas=self.lambdas[:K], phis=self.phis[:, :K])


def _check_dense_cap(graph: Graph, cap: int) -> None:
    if graph.n > cap:
        error_msg: str = (
            f"Dense eigensolver refused for n={graph.n} above the cap of {cap}; "
            "use the iterative path or raise the cap explicitly"
        )
        raise DenseCapExceededError(error_msg)


def dense_eigenpairs(
    graph: Graph,
    kind: OperatorKind,
    cap: int = DEFAULT_DENSE_CAP,
) -> SpectralBasis:
    """All n eigenpairs of any operator kind via its symmetric form."""
    _check_dense_cap(graph, cap)
    matrix, scaling = symmetric_dense_matrix(kind, graph)
    lambdas, vectors = np.linalg.eigh(matrix)
    return SpectralBasis(
        operator=kind,
        lambdas=lambdas,
        phis=vectors / scaling[:, None],
        inner_product_r=kind.inner_product_r,
    )


def dense_signless_eigenpairs(
    graph: Graph,
    kind: OperatorKind = L0_PLUS,
    cap: int = DEFAULT_DENSE_CAP,
) -> SpectralBasis:
    if not kind.is_signless:
        error_msg: str = f"Expected a signless operator, got {kind}"
        raise ValueError(error_msg)

    return dense_eigenpairs(graph, kind, cap=cap)


def smallest_signless_eigenpairs(
    graph: Graph,
    kind: OperatorKind,
    K: int,  # noqa: N803
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
) -> SpectralBasis:
    """K smallest eigenpairs of a signless operator by Lanczos.

    For Delta_1+ and Delta_s+ the largest eigenpairs of L_s are computed and
    mirrored through lambda -> 2 - lambda; Delta_1+ eigenfunctions are D^-1/2 v.
    Other signless kinds are iterated at the smallest end of their symmetric form.
    """
    if not kind.is_signless:
        error_msg: str = f"Expected a signless operator, got {kind}"
        raise ValueError(error_msg)

    if not 1 <= K <= graph.n:
        error_msg = f"K must lie in [1, {graph.n}], got {K}"
        raise ValueError(error_msg)

    rng: np.random.Generator = counter_rng(seed, StreamTag.LANCZOS, graph.n, K)
    if kind in (L1_PLUS, LS_PLUS):
        matvec, _ = symmetric_form(LS, graph)
        result: LanczosResult = block_lanczos(
            matvec,
            graph.n,
            K,
            rng,
            which="largest",
            tolerance=tolerance,
            max_restarts=max_restarts,
        )
        lambdas: npt.NDArray[np.float64] = 2.0 - result.values
        phis: npt.NDArray[np.float64] = (
            result.vectors * degree_power(graph, -0.5)[:, None]
            if kind == L1_PLUS
            else result.vectors
        )
    else:
        logger.info("Iterating %s at the smallest end directly; expect slower convergence", kind)
        matvec, scaling = symmetric_form(kind, graph)
        result = block_lanczos(
            matvec,
            graph.n,
            K,
            rng,
            which="smallest",
            tolerance=tolerance,
            max_restarts=max_restarts,
        )
        lambdas = result.values
        phis = result.vectors / scaling[:, None]

    logger.info(
        "Computed %d eigenpairs of %s (n=%d, restarts=%d)",
        K,
        kind,
        graph.n,
        result.restarts,
    )
    return SpectralBasis(
        operator=kind,
        lambdas=lambdas,
        phis=phis,
        inner_product_r=kind.inner_product_r,
    )


def signless_spectral_basis(
    graph: Graph,
    kind: OperatorKind,
    K: int,  # noqa: N803
    seed: int = 0,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> SpectralBasis:
    """K-term basis for spectral diffusion; Delta_0+ goes dense below the cap."""
    if kind == L0_PLUS and graph.n <= dense_cap:
        return dense_signless_eigenpairs(graph, kind, cap=dense_cap).truncate(K)

    return smallest_signless_eigenpairs(graph, kind, K, seed=seed)


def count_zero_modes(
    basis: SpectralBasis,
    tolerance: float = ZERO_MODE_TOLERANCE,
) -> int:
    return int(np.sum(basis.lambdas <= tolerance))


def largest_eigenvalue(
    graph: Graph,
    kind: OperatorKind,
    seed: int = 0,
) -> float:
    """lambda_n; exactly 2 for Delta_1+ and Delta_s+, the mirror of the constant mode."""
    if kind in (L1_PLUS, LS_PLUS):
        return 2.0

    # small operators fall back to dense eigh inside block_lanczos
    matvec, _ = symmetric_form(kind, graph)
    rng: np.random.Generator = counter_rng(seed, StreamTag.LANCZOS, graph.n, 0)
    return float(block_lanczos(matvec, graph.n, 1, rng).values[0])


def estimate_largest_eigenvalue(
    graph: Graph,
    kind: OperatorKind,
    seed: int = 0,
    iterations: int = POWER_ITERATIONS,
) -> float:
    """Power-iteration estimate of lambda_max; a lower bound, used for advisories."""
    matvec, _ = symmetric_form(kind, graph)
    rng: np.random.Generator = counter_rng(seed, StreamTag.POWER_ITERATION, graph.n)
    vector: NodeFunction = rng.standard_normal(graph.n)
    vector /= np.linalg.norm(vector)
    estimate: float = 0.0
    for _ in range(iterations):
        image: NodeFunction = matvec(vector)
        estimate = float(vector @ image)
        norm: float = float(np.linalg.norm(image))
        if norm == 0.0:
            return 0.0
        vector = image / norm

    return estimate


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_graph(seed: int, n: int, p: float) -> Graph:
    from src.services.graph.graph import Graph

    rng: np.random.Generator = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    upper[np.arange(n - 1), np.arange(1, n)] = True
    heads, tails = np.nonzero(upper)
    return Graph.from_edges(n, heads, tails)


def test_spectral_mirror_and_range() -> None:
    """sorted(lambda(L+)) = 2 - reversed(lambda(L)) and every value lies in [0, 2]."""
    from src.services.operators.operator_kind import L1

    for seed in range(20):
        n: int = 20 + 9 * seed
        graph: Graph = _random_graph(seed, n, 0.1 if seed % 2 else 0.5)
        for signless, standard in ((L1_PLUS, L1), (LS_PLUS, LS)):
            plus: NodeFunction = dense_eigenpairs(graph, signless).lambdas
            minus: NodeFunction = dense_eigenpairs(graph, standard).lambdas
            np.testing.assert_allclose(plus, 2.0 - minus[::-1], atol=1e-8)
            for values in (plus, minus):
                assert values.min() >= -1e-8
                assert values.max() <= 2.0 + 1e-8


def test_standard_normalisations_share_eigenvalues() -> None:
    """L_1 and L_s are similar: equal spectra and D^1/2 related eigenvectors."""
    from src.services.operators.laplacian import apply_operator
    from src.services.operators.operator_kind import L1

    graph: Graph = _random_graph(3, 40, 0.2)
    symmetric: SpectralBasis = dense_eigenpairs(graph, LS)
    random_walk: SpectralBasis = dense_eigenpairs(graph, L1)
    np.testing.assert_allclose(symmetric.lambdas, random_walk.lambdas, atol=1e-10)
    transformed = symmetric.phis * degree_power(graph, -0.5)[:, None]
    for k in range(graph.n):
        residual = apply_operator(L1, graph, transformed[:, k]) - (
            symmetric.lambdas[k] * transformed[:, k]
        )
        assert np.linalg.norm(residual) <= 1e-8


def test_dense_signless_examples() -> None:
    """K2 and K3 spectra of L0+, and a double zero for two disjoint edges."""
    from src.services.graph.named_graphs import complete_graph, disjoint_union

    np.testing.assert_allclose(
        dense_signless_eigenpairs(complete_graph(2)).lambdas,
        [0.0, 2.0],
        atol=1e-12,
    )
    triangle: SpectralBasis = dense_signless_eigenpairs(complete_graph(3))
    np.testing.assert_allclose(triangle.lambdas, [1.0, 1.0, 4.0], atol=1e-12)
    assert triangle.largest_eigenvalue == np.max(triangle.lambdas)
    pair: SpectralBasis = dense_signless_eigenpairs(
        disjoint_union(complete_graph(2), complete_graph(2)),
    )
    assert count_zero_modes(pair) == 2


def test_dense_cap_is_enforced() -> None:
    """Graphs above the cap are refused with a pointer to the alternatives."""
    import pytest

    from src.services.graph.named_graphs import cycle_graph

    with pytest.raises(DenseCapExceededError, match="iterative path"):
        dense_signless_eigenpairs(cycle_graph(12), cap=10)


def test_smallest_signless_on_k2_and_odd_cycle() -> None:
    """K2 mirrors to (0, 2) with the bipartition vector; C5 has no zero mode."""
    from src.services.graph.named_graphs import complete_graph, cycle_graph

    edge: SpectralBasis = smallest_signless_eigenpairs(complete_graph(2), L1_PLUS, 2)
    np.testing.assert_allclose(edge.lambdas, [0.0, 2.0], atol=1e-12)
    first = edge.phis[:, 0]
    assert np.isclose(first[0], -first[1])
    cycle: SpectralBasis = smallest_signless_eigenpairs(cycle_graph(5), L1_PLUS, 1)
    assert cycle.lambdas[0] > 1e-3


def test_smallest_signless_recovers_bipartition() -> None:
    """On a connected bipartite graph the sign of phi_1 splits the two sides."""
    from src.services.graph.named_graphs import random_bipartite_graph

    graph: Graph = random_bipartite_graph(8, 8, 0.5, seed=4)
    basis: SpectralBasis = smallest_signless_eigenpairs(graph, LS_PLUS, 1)
    assert abs(basis.lambdas[0]) <= 1e-8
    signs = np.sign(basis.phis[:, 0])
    assert len(set(signs[:8])) == 1
    assert len(set(signs[8:])) == 1
    assert signs[0] == -signs[8]


def test_lanczos_basis_matches_dense() -> None:
    """Iterative pairs agree with the dense solver, are orthonormal, and have small residuals."""
    from src.services.graph.graph import inner_product_V
    from src.services.operators.laplacian import apply_operator

    graph: Graph = _random_graph(11, 300, 0.05)
    for kind in (L1_PLUS, LS_PLUS, L0_PLUS):
        iterative: SpectralBasis = smallest_signless_eigenpairs(graph, kind, 5, seed=2)
        dense: SpectralBasis = dense_eigenpairs(graph, kind)
        np.testing.assert_allclose(iterative.lambdas, dense.lambdas[:5], atol=1e-6)
        r: float = iterative.inner_product_r if iterative.inner_product_r is not None else 0.0
        for k in range(5):
            phi = iterative.phis[:, k]
            residual = apply_operator(kind, graph, phi) - iterative.lambdas[k] * phi
            assert np.linalg.norm(residual) <= 1e-6 * max(1.0, iterative.lambdas[k])
            for m in range(5):
                expected: float = 1.0 if k == m else 0.0
                value: float = inner_product_V(graph, phi, iterative.phis[:, m], r)
                assert abs(value - expected) <= 1e-8


def test_count_zero_modes_by_structure() -> None:
    """Zero modes count components for Delta_1 and bipartite components for Delta_1+."""
    from src.services.graph.named_graphs import (
        complete_graph,
        components_count,
        cycle_graph,
        disjoint_union,
        is_bipartite,
        random_bipartite_graph,
    )
    from src.services.operators.operator_kind import L1

    rng: np.random.Generator = np.random.default_rng(0)
    for index in range(50):
        parts: list[Graph] = []
        bipartite_parts: int = 0
        for _ in range(int(rng.integers(1, 5))):
            choice: int = int(rng.integers(0, 4))
            if choice == 0:
                parts.append(cycle_graph(2 * int(rng.integers(2, 10))))
                bipartite_parts += 1
            elif choice == 1:
                parts.append(cycle_graph(2 * int(rng.integers(1, 10)) + 1))
            elif choice == 2:
                parts.append(
                    random_bipartite_graph(
                        int(rng.integers(1, 6)),
                        int(rng.integers(1, 6)),
                        0.4,
                        seed=index,
                    ),
                )
                bipartite_parts += 1
            else:
                parts.append(complete_graph(int(rng.integers(3, 7))))
        graph: Graph = disjoint_union(*parts)
        assert components_count(graph) == len(parts)
        assert is_bipartite(graph) == (bipartite_parts == len(parts))
        assert count_zero_modes(dense_eigenpairs(graph, L1_PLUS)) == bipartite_parts
        assert count_zero_modes(dense_eigenpairs(graph, L1)) == len(parts)


def test_zero_mode_is_rescaled_indicator() -> None:
    """Delta_1+ zero mode is +-(chi_T - chi_S\\T); Delta_s+ carries the D^1/2 rescaling."""
    from src.services.graph.named_graphs import random_bipartite_graph

    graph: Graph = random_bipartite_graph(5, 7, 0.5, seed=1)
    indicator = np.concatenate([np.ones(5), -np.ones(7)])
    walk: NodeFunction = dense_eigenpairs(graph, L1_PLUS).phis[:, 0]
    walk = walk / walk[0]
    np.testing.assert_allclose(walk, indicator, atol=1e-8)
    symmetric: NodeFunction = dense_eigenpairs(graph, LS_PLUS).phis[:, 0]
    rescaled = indicator * np.sqrt(graph.degrees)
    symmetric = symmetric / symmetric[0] * rescaled[0]
    np.testing.assert_allclose(symmetric, rescaled, atol=1e-8)


def test_largest_eigenvalue() -> None:
    """Exactly 2 for the normalised kinds; dense value for Delta_0+ and a power-iteration bound."""
    from src.services.graph.named_graphs import complete_graph

    triangle: Graph = complete_graph(3)
    assert largest_eigenvalue(triangle, L1_PLUS) == 2.0
    assert np.isclose(largest_eigenvalue(triangle, L0_PLUS), 4.0)
    estimate: float = estimate_largest_eigenvalue(triangle, L0_PLUS)
    assert 1.0 <= estimate <= 4.0 + 1e-12


def test_truncate() -> None:
    """Truncation keeps the K smallest pairs."""
    import pytest

    from src.services.graph.named_graphs import cycle_graph

    basis: SpectralBasis = dense_eigenpairs(cycle_graph(6), L1_PLUS)
    short: SpectralBasis = basis.truncate(2)
    assert short.K == 2
    assert np.array_equal(short.lambdas, basis.lambdas[:2])
    with pytest.raises(ValueError, match="Cannot truncate"):
        basis.truncate(7)


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
