from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from src.services.graph.graph import (
    EdgeFunction,
    Graph,
    NodeFunction,
    inner_product_V,
)
from src.services.operators.operator_kind import OperatorKind

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt


def _check_q(q: float) -> None:
    if not 0.5 <= q <= 1.0:
        error_msg: str = f"q must lie in [1/2, 1], got {q}"
        raise ValueError(error_msg)


def _check_r(r: float) -> None:
    if not 0.0 <= r <= 1.0:
        error_msg: str = f"r must lie in [0, 1], got {r}"
        raise ValueError(error_msg)


def degree_power(graph: Graph, exponent: float) -> NodeFunction:
    """d_i^exponent with d^0 = 1 exactly."""
    if exponent == 0.0:
        return np.ones(graph.n, dtype=np.float64)

    return graph.degrees**exponent


def _scale_rows(
    scale: NodeFunction,
    x: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    return scale[:, None] * x if x.ndim == 2 else scale * x


def apply_operator(
    kind: OperatorKind,
    graph: Graph,
    u: NodeFunction,
) -> NodeFunction:
    """Matrix-free Delta u; one pass over the edges.

    r-normalised:  d^(1-r) u -/+ d^(-r) A u
    symmetric:     u -/+ D^-1/2 A D^-1/2 u
    """
    sign: float = 1.0 if kind.is_signless else -1.0
    if kind.r is None:
        inverse_sqrt: NodeFunction = degree_power(graph, -0.5)
        return u + sign * _scale_rows(
            inverse_sqrt,
            graph.adjacency @ _scale_rows(inverse_sqrt, u),
        )

    return _scale_rows(degree_power(graph, 1.0 - kind.r), u) + sign * _scale_rows(
        degree_power(graph, -kind.r),
        graph.adjacency @ u,
    )


def gradient(graph: Graph, u: NodeFunction, q: float = 1.0) -> EdgeFunction:
    """(grad u)_ij = w_ij^(1-q) (u_j - u_i)."""
    _check_q(q)
    columns: npt.NDArray[np.int32] = graph.adjacency.indices
    return graph.adjacency.data ** (1.0 - q) * (u[columns] - u[graph.rows])


def signless_gradient(graph: Graph, u: NodeFunction, q: float = 1.0) -> EdgeFunction:
    """(grad+ u)_ij = w_ij^(1-q) (u_j + u_i)."""
    _check_q(q)
    columns: npt.NDArray[np.int32] = graph.adjacency.indices
    return graph.adjacency.data ** (1.0 - q) * (u[columns] + u[graph.rows])


def _divergence(
    graph: Graph,
    phi: EdgeFunction,
    q: float,
    r: float,
    sign: float,
) -> NodeFunction:
    _check_q(q)
    _check_r(r)
    weighted: EdgeFunction = graph.adjacency.data**q * phi
    # entry k holds phi_ij with i = rows[k], j = indices[k]
    incoming: NodeFunction = np.bincount(
        graph.adjacency.indices,
        weights=weighted,
        minlength=graph.n,
    )
    outgoing: NodeFunction = np.bincount(graph.rows, weights=weighted, minlength=graph.n)
    return 0.5 * degree_power(graph, -r) * (incoming + sign * outgoing)


def divergence(
    graph: Graph,
    phi: EdgeFunction,
    q: float = 1.0,
    r: float = 0.0,
) -> NodeFunction:
    """(div phi)_i = 1/2 d_i^-r sum_j w_ij^q (phi_ji - phi_ij)."""
    return _divergence(graph, phi, q, r, -1.0)


def signless_divergence(
    graph: Graph,
    phi: EdgeFunction,
    q: float = 1.0,
    r: float = 0.0,
) -> NodeFunction:
    """(div+ phi)_i = 1/2 d_i^-r sum_j w_ij^q (phi_ji + phi_ij)."""
    return _divergence(graph, phi, q, r, 1.0)


def rayleigh(kind: OperatorKind, graph: Graph, u: NodeFunction) -> float:
    """<u, Delta u> / <u, u> in the inner product the operator is self-adjoint in."""
    r: float = kind.r if kind.r is not None else 0.0
    norm_squared: float = inner_product_V(graph, u, u, r)
    if norm_squared == 0.0:
        error_msg: str = "Rayleigh quotient is undefined for u = 0"
        raise ValueError(error_msg)

    return inner_product_V(graph, u, apply_operator(kind, graph, u), r) / norm_squared


def symmetric_scaling(kind: OperatorKind, graph: Graph) -> NodeFunction:
    """s with S Delta S^-1 symmetric for S = diag(s): d^(r/2), or ones for symmetric kinds."""
    if kind.r is None:
        return np.ones(graph.n, dtype=np.float64)

    return degree_power(graph, kind.r / 2.0)


def symmetric_diagonal(kind: OperatorKind, graph: Graph) -> NodeFunction:
    """Diagonal of the symmetric form; used as the Jacobi preconditioner."""
    if kind.r is None:
        return np.ones(graph.n, dtype=np.float64)

    return degree_power(graph, 1.0 - kind.r)


def symmetric_form(
    kind: OperatorKind,
    graph: Graph,
) -> tuple[Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]], NodeFunction]:
    """Matvec of M = S Delta S^-1 and the scaling s.

    r-normalised: M = D^(1-r) -/+ D^(-r/2) A D^(-r/2); symmetric kinds are already symmetric.
    Accepts a vector or an (n, b) block.
    """
    scaling: NodeFunction = symmetric_scaling(kind, graph)
    if kind.r is None:
        return (lambda x: apply_operator(kind, graph, x)), scaling

    sign: float = 1.0 if kind.is_signless else -1.0
    diagonal: NodeFunction = degree_power(graph, 1.0 - kind.r)
    half: NodeFunction = degree_power(graph, -kind.r / 2.0)

    def matvec(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return _scale_rows(diagonal, x) + sign * _scale_rows(
            half,
            graph.adjacency @ _scale_rows(half, x),
        )

    return matvec, scaling


def symmetric_dense_matrix(
    kind: OperatorKind,
    graph: Graph,
) -> tuple[npt.NDArray[np.float64], NodeFunction]:
    sign: float = 1.0 if kind.is_signless else -1.0
    adjacency: npt.NDArray[np.float64] = graph.adjacency.toarray()
    if kind.r is None:
        half: NodeFunction = degree_power(graph, -0.5)
        diagonal: NodeFunction = np.ones(graph.n, dtype=np.float64)
    else:
        half = degree_power(graph, -kind.r / 2.0)
        diagonal = degree_power(graph, 1.0 - kind.r)

    matrix: npt.NDArray[np.float64] = sign * (half[:, None] * adjacency * half[None, :])
    matrix[np.diag_indices(graph.n)] += diagonal
    return matrix, symmetric_scaling(kind, graph)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_graph(seed: int, n: int = 10, p: float = 0.5) -> Graph:
    rng: np.random.Generator = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    # spanning path so no vertex is isolated
    upper[np.arange(n - 1), np.arange(1, n)] = True
    heads, tails = np.nonzero(upper)
    return Graph.from_edges(n, heads, tails, rng.uniform(0.2, 2.0, heads.size))


def test_apply_operator_on_k2() -> None:
    """Bipartition vector is a zero mode; the constant has eigenvalue 2."""
    from src.services.operators.operator_kind import L1_PLUS

    edge: Graph = Graph.from_edges(2, [0], [1])
    assert np.array_equal(apply_operator(L1_PLUS, edge, np.array([1.0, -1.0])), [0.0, 0.0])
    assert np.array_equal(apply_operator(L1_PLUS, edge, np.array([1.0, 1.0])), [2.0, 2.0])


def test_mirror_identity() -> None:
    """Delta_1+ + Delta_1 = 2I and Delta_s+ + Delta_s = 2I."""
    from src.services.operators.operator_kind import L1, L1_PLUS, LS, LS_PLUS

    for seed in range(10):
        graph: Graph = _random_graph(seed)
        u: NodeFunction = np.random.default_rng(seed).standard_normal(graph.n)
        for signless, standard in ((L1_PLUS, L1), (LS_PLUS, LS)):
            total: NodeFunction = apply_operator(signless, graph, u) + apply_operator(
                standard,
                graph,
                u,
            )
            np.testing.assert_allclose(total, 2.0 * u, atol=1e-12)


def test_gradient_examples() -> None:
    """Constants have no gradient; alternating signs have no signless gradient."""
    graph: Graph = Graph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])
    assert np.all(gradient(graph, np.full(4, 3.0)) == 0.0)
    assert np.all(signless_gradient(graph, np.array([1.0, -1.0, 1.0, -1.0])) == 0.0)
    gradient_values: EdgeFunction = gradient(graph, np.arange(4.0))
    # antisymmetric: the (i, j) and (j, i) entries cancel in pairs
    assert np.isclose(gradient_values.sum(), 0.0)


def test_signless_dirichlet_energy() -> None:
    """1/2 ||grad+ u||_E^2 = 1/4 sum_ij w (u_i + u_j)^2."""
    from src.services.graph.graph import inner_product_E

    graph: Graph = _random_graph(4)
    u: NodeFunction = np.random.default_rng(4).standard_normal(graph.n)
    phi: EdgeFunction = signless_gradient(graph, u)
    columns = graph.adjacency.indices
    expected: float = 0.25 * float(
        np.sum(graph.adjacency.data * (u[graph.rows] + u[columns]) ** 2),
    )
    assert np.isclose(0.5 * inner_product_E(graph, phi, phi), expected, rtol=1e-12)


def test_divergence_of_symmetric_and_antisymmetric_fields() -> None:
    """div kills symmetric fields and div+ kills antisymmetric ones."""
    graph: Graph = _random_graph(5)
    u: NodeFunction = np.random.default_rng(5).standard_normal(graph.n)
    assert np.all(divergence(graph, np.zeros(graph.adjacency.nnz)) == 0.0)
    np.testing.assert_allclose(
        divergence(graph, signless_gradient(graph, u)),
        0.0,
        atol=1e-12,
    )
    np.testing.assert_allclose(
        signless_divergence(graph, gradient(graph, u)),
        0.0,
        atol=1e-12,
    )


def test_adjointness() -> None:
    """<grad u, phi>_E = <u, div phi>_V for both families."""
    from src.services.graph.graph import inner_product_E

    for seed in range(20):
        graph: Graph = _random_graph(seed, n=15, p=0.3)
        rng: np.random.Generator = np.random.default_rng(100 + seed)
        u: NodeFunction = rng.standard_normal(graph.n)
        phi: EdgeFunction = rng.standard_normal(graph.adjacency.nnz)
        for q in (0.5, 0.75, 1.0):
            for r in (0.0, 0.5, 1.0):
                for grad, div in (
                    (gradient, divergence),
                    (signless_gradient, signless_divergence),
                ):
                    left: float = inner_product_E(graph, grad(graph, u, q), phi, q)
                    right: float = inner_product_V(graph, u, div(graph, phi, q, r), r)
                    assert np.isclose(left, right, rtol=1e-10, atol=1e-12)


def test_composition_matches_apply() -> None:
    """Delta_r = div grad and Delta_r+ = div+ grad+."""
    for seed in range(10):
        graph: Graph = _random_graph(seed)
        u: NodeFunction = np.random.default_rng(seed).standard_normal(graph.n)
        for r in (0.0, 0.5, 1.0):
            for q in (0.5, 1.0):
                np.testing.assert_allclose(
                    divergence(graph, gradient(graph, u, q), q, r),
                    apply_operator(OperatorKind.standard(r), graph, u),
                    rtol=1e-12,
                    atol=1e-12,
                )
                np.testing.assert_allclose(
                    signless_divergence(graph, signless_gradient(graph, u, q), q, r),
                    apply_operator(OperatorKind.signless(r), graph, u),
                    rtol=1e-12,
                    atol=1e-12,
                )


def test_self_adjoint_and_positive_semidefinite() -> None:
    """<u, Delta v> = <Delta u, v> and <u, Delta u> >= 0 in the matching inner product."""
    from src.services.operators.operator_kind import NAMED_OPERATORS

    for seed in range(10):
        graph: Graph = _random_graph(seed, n=12)
        rng: np.random.Generator = np.random.default_rng(seed)
        u: NodeFunction = rng.standard_normal(graph.n)
        v: NodeFunction = rng.standard_normal(graph.n)
        for kind in [*NAMED_OPERATORS.values(), OperatorKind.signless(0.5)]:
            r: float = kind.r if kind.r is not None else 0.0
            left: float = inner_product_V(graph, u, apply_operator(kind, graph, v), r)
            right: float = inner_product_V(graph, apply_operator(kind, graph, u), v, r)
            assert np.isclose(left, right, rtol=1e-10, atol=1e-10)
            assert inner_product_V(graph, u, apply_operator(kind, graph, u), r) >= -1e-12


def test_rayleigh() -> None:
    """K2 constant gives 2; random inputs stay in [0, 2] for the normalised kinds."""
    import pytest

    from src.services.operators.operator_kind import L1, L1_PLUS, LS, LS_PLUS

    edge: Graph = Graph.from_edges(2, [0], [1])
    assert rayleigh(L1_PLUS, edge, np.ones(2)) == 2.0
    with pytest.raises(ValueError, match="undefined"):
        rayleigh(L1_PLUS, edge, np.zeros(2))
    graph: Graph = _random_graph(9, n=20)
    rng: np.random.Generator = np.random.default_rng(9)
    for _ in range(20):
        u: NodeFunction = rng.standard_normal(graph.n)
        for kind in (L1, L1_PLUS, LS, LS_PLUS):
            assert -1e-12 <= rayleigh(kind, graph, u) <= 2.0 + 1e-12


def test_symmetric_form_is_similar_to_operator() -> None:
    """S Delta S^-1 x from the symmetric form matches the direct operator."""
    from src.services.operators.operator_kind import NAMED_OPERATORS

    graph: Graph = _random_graph(2, n=9)
    x: NodeFunction = np.random.default_rng(2).standard_normal(graph.n)
    for kind in NAMED_OPERATORS.values():
        matvec, scaling = symmetric_form(kind, graph)
        np.testing.assert_allclose(
            matvec(x),
            scaling * apply_operator(kind, graph, x / scaling),
            rtol=1e-12,
            atol=1e-12,
        )
        dense, _ = symmetric_dense_matrix(kind, graph)
        np.testing.assert_allclose(dense, dense.T, rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(dense @ x, matvec(x), rtol=1e-12, atol=1e-12)
        block: npt.NDArray[np.float64] = np.stack([x, 2.0 * x], axis=1)
        np.testing.assert_allclose(matvec(block)[:, 1], 2.0 * matvec(x), rtol=1e-12)


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
