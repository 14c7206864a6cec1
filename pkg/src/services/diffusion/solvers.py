"""Solvers for the signless diffusion step du/dt = -Delta+ u on [0, tau]."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from src.services.diffusion.conjugate_gradient import (
    ConjugateGradientResult,
    conjugate_gradient,
)
from src.services.diffusion.diffusion_method import DiffusionMethod, DiffusionVariant
from src.services.operators.laplacian import (
    apply_operator,
    symmetric_diagonal,
    symmetric_form,
)
from src.services.operators.operator_kind import L1_PLUS, LS_PLUS, OperatorKind
from src.services.spectra.spectral_basis import estimate_largest_eigenvalue

if TYPE_CHECKING:
    import numpy.typing as npt

    from src.services.graph.graph import Graph, NodeFunction
    from src.services.spectra.spectral_basis import SpectralBasis

logger: logging.Logger = logging.getLogger(__name__)

BLOW_UP_THRESHOLD: float = 1e12
IMPLICIT_TOLERANCE: float = 1e-10


class DiffusionBlowUpError(ArithmeticError):
    def __init__(self, dt: float, step: int, magnitude: float) -> None:
        self.dt: float = dt
        self.step: int = step
        self.magnitude: float = magnitude
        super().__init__(
            f"Explicit Euler blew up at step {step} with dt={dt:.6g} "
            f"(max |u| = {magnitude:.3e}); reduce dt or raise M",
        )


def _check_input(graph: Graph, u0: NodeFunction) -> None:
    if u0.shape != (graph.n,):
        error_msg: str = f"Expected a node function of length {graph.n}, got shape {u0.shape}"
        raise ValueError(error_msg)


def diffuse_spectral(
    basis: SpectralBasis,
    graph: Graph,
    u0: NodeFunction,
    tau: float,
    operator: OperatorKind | None = None,
) -> NodeFunction:
    """sum_k exp(-lambda_k tau) <phi_k, u0> phi_k over the basis."""
    _check_input(graph, u0)
    if operator is not None and basis.operator != operator:
        error_msg: str = f"Basis was computed for {basis.operator}, not {operator}"
        raise ValueError(error_msg)

    if basis.inner_product_r != basis.operator.inner_product_r:
        error_msg = (
            f"Basis inner product r={basis.inner_product_r} does not match "
            f"{basis.operator}"
        )
        raise ValueError(error_msg)

    if basis.phis.shape[0] != graph.n:
        error_msg = f"Basis has {basis.phis.shape[0]} rows for a graph with n={graph.n}"
        raise ValueError(error_msg)

    coefficients: NodeFunction = basis.coefficients(graph, u0)
    return basis.phis @ (np.exp(-basis.lambdas * tau) * coefficients)


def stability_limit(kind: OperatorKind, graph: Graph, seed: int = 0) -> float:
    """lambda_max used for the dt * lambda_max < 2 advisory."""
    if kind in (L1_PLUS, LS_PLUS):
        return 2.0

    return estimate_largest_eigenvalue(graph, kind, seed=seed)


def diffuse_euler_explicit(
    kind: OperatorKind,
    graph: Graph,
    u0: NodeFunction,
    tau: float,
    M: int,  # noqa: N803
    lambda_max: float | None = None,
) -> NodeFunction:
    """u^(m+1) = u^m - dt Delta u^m with dt = tau / M, one edge pass per step."""
    _check_input(graph, u0)
    if M < 1:
        error_msg: str = f"M must be at least 1, got {M}"
        raise ValueError(error_msg)

    dt: float = tau / M
    limit: float = lambda_max if lambda_max is not None else stability_limit(kind, graph)
    if dt * limit >= 2.0:
        logger.warning(
            "Explicit Euler step dt=%.4g times lambda_max=%.4g is %.3g >= 2; "
            "the scheme may be unstable",
            dt,
            limit,
            dt * limit,
        )

    u: NodeFunction = np.array(u0, dtype=np.float64)
    for step in range(1, M + 1):
        u = u - dt * apply_operator(kind, graph, u)
        magnitude: float = float(np.max(np.abs(u))) if u.size else 0.0
        if not np.isfinite(magnitude) or magnitude > BLOW_UP_THRESHOLD:
            raise DiffusionBlowUpError(dt, step, magnitude)

    return u


def diffuse_euler_implicit(
    kind: OperatorKind,
    graph: Graph,
    u0: NodeFunction,
    tau: float,
    M: int,  # noqa: N803
) -> NodeFunction:
    """(I + dt Delta) u^(m+1) = u^m, solved by Jacobi-preconditioned CG.

    The solve runs on the symmetric form S Delta S^-1 with w = S u.
    """
    _check_input(graph, u0)
    if M < 1:
        error_msg: str = f"M must be at least 1, got {M}"
        raise ValueError(error_msg)

    dt: float = tau / M
    matvec, scaling = symmetric_form(kind, graph)
    inverse_diagonal: NodeFunction = 1.0 / (1.0 + dt * symmetric_diagonal(kind, graph))

    def system(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return x + dt * matvec(x)

    w: NodeFunction = scaling * u0
    total_iterations: int = 0
    for _ in range(M):
        result: ConjugateGradientResult = conjugate_gradient(
            system,
            w,
            preconditioner=lambda r: inverse_diagonal * r,
            x0=w,
            tolerance=IMPLICIT_TOLERANCE,
        )
        w = result.solution
        total_iterations += result.iterations

    logger.debug(
        "Implicit Euler: %d steps, %d CG iterations in total",
        M,
        total_iterations,
    )
    return w / scaling


def diffuse(
    method: DiffusionMethod,
    kind: OperatorKind,
    graph: Graph,
    u0: NodeFunction,
    basis: SpectralBasis | None = None,
    lambda_max: float | None = None,
) -> NodeFunction:
    match method.variant:
        case DiffusionVariant.SPECTRAL:
            if basis is None:
                error_msg: str = "The spectral solver needs a precomputed basis"
                raise ValueError(error_msg)

            truncated: SpectralBasis = (
                basis.truncate(method.K)
                if method.K is not None and method.K < basis.K
                else basis
            )
            return diffuse_spectral(truncated, graph, u0, method.tau, operator=kind)

        case DiffusionVariant.EULER:
            return diffuse_euler_explicit(
                kind,
                graph,
                u0,
                method.tau,
                method.steps,
                lambda_max=lambda_max,
            )

        case DiffusionVariant.IMPLICIT:
            return diffuse_euler_implicit(kind, graph, u0, method.tau, method.steps)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_graph(seed: int, n: int, p: float) -> Graph:
    from src.services.graph.graph import Graph

    rng: np.random.Generator = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    upper[np.arange(n - 1), np.arange(1, n)] = True
    heads, tails = np.nonzero(upper)
    return Graph.from_edges(n, heads, tails)


def _full_basis(graph: Graph, kind: OperatorKind) -> SpectralBasis:
    from src.services.spectra.spectral_basis import dense_eigenpairs

    return dense_eigenpairs(graph, kind)


def test_spectral_eigenfunction_decay() -> None:
    """phi_k decays by exp(-lambda_k tau); a zero mode is stationary."""
    from src.services.graph.named_graphs import random_bipartite_graph

    graph: Graph = random_bipartite_graph(6, 5, 0.4, seed=2)
    for kind in (L1_PLUS, LS_PLUS):
        basis: SpectralBasis = _full_basis(graph, kind)
        assert abs(basis.lambdas[0]) <= 1e-10
        for tau in (0.5, 20.0):
            zero_mode: NodeFunction = basis.phis[:, 0]
            np.testing.assert_allclose(
                diffuse_spectral(basis, graph, zero_mode, tau),
                zero_mode * np.exp(-basis.lambdas[0] * tau),
                atol=1e-10,
            )
            phi: NodeFunction = basis.phis[:, 4]
            np.testing.assert_allclose(
                diffuse_spectral(basis, graph, phi, tau),
                np.exp(-basis.lambdas[4] * tau) * phi,
                atol=1e-10,
            )


def test_spectral_rejects_mismatched_basis() -> None:
    """A basis computed for another operator is refused."""
    import pytest

    from src.services.graph.named_graphs import cycle_graph

    graph: Graph = cycle_graph(5)
    basis: SpectralBasis = _full_basis(graph, L1_PLUS)
    with pytest.raises(ValueError, match="computed for l1plus"):
        diffuse_spectral(basis, graph, np.ones(5), 1.0, operator=LS_PLUS)
    with pytest.raises(ValueError, match="does not match"):
        diffuse_spectral(basis._replace(inner_product_r=None), graph, np.ones(5), 1.0)


def test_euler_steps_on_k2() -> None:
    """One explicit step maps (1, 1) to (-1, -1); one implicit step to (1/3, 1/3)."""
    from src.services.graph.named_graphs import complete_graph

    edge: Graph = complete_graph(2)
    ones: NodeFunction = np.ones(2)
    assert np.array_equal(diffuse_euler_explicit(L1_PLUS, edge, ones, 1.0, 1), [-1.0, -1.0])
    np.testing.assert_allclose(
        diffuse_euler_implicit(L1_PLUS, edge, ones, 1.0, 1),
        [1.0 / 3.0, 1.0 / 3.0],
        rtol=1e-10,
    )


def test_euler_preserves_bipartition_mode() -> None:
    """Delta+ u0 = 0 leaves both Euler solvers at u0."""
    from src.services.graph.named_graphs import complete_bipartite_graph
    from src.services.operators.operator_kind import L0_PLUS

    graph: Graph = complete_bipartite_graph(3, 4)
    indicator: NodeFunction = np.concatenate([np.ones(3), -np.ones(4)])
    for kind in (L0_PLUS, L1_PLUS):
        assert np.array_equal(
            diffuse_euler_explicit(kind, graph, indicator, 5.0, 50),
            indicator,
        )
        for M in (1, 10):
            np.testing.assert_allclose(
                diffuse_euler_implicit(kind, graph, indicator, 5.0, M),
                indicator,
                atol=1e-12,
            )


def test_explicit_euler_blow_up_and_warning() -> None:
    """Large steps warn, and runaway growth raises with dt and step index."""
    from unittest.mock import patch

    import pytest

    from src.services.graph.named_graphs import complete_graph

    graph: Graph = complete_graph(4)
    u0: NodeFunction = np.array([1.0, 1.0, 1.0, 1.0])
    with (
        patch.object(logger, "warning") as warning,
        pytest.raises(DiffusionBlowUpError, match="dt=10") as exc_info,
    ):
        diffuse_euler_explicit(L1_PLUS, graph, u0, 1000.0, 100)
    warning.assert_called_once()
    assert exc_info.value.dt == 10.0
    assert exc_info.value.step >= 2


def test_linearity_of_all_solvers() -> None:
    """diffuse(a u + b v) = a diffuse(u) + b diffuse(v)."""
    graph: Graph = _random_graph(4, 30, 0.15)
    rng: np.random.Generator = np.random.default_rng(4)
    u: NodeFunction = rng.standard_normal(graph.n)
    v: NodeFunction = rng.standard_normal(graph.n)
    basis: SpectralBasis = _full_basis(graph, L1_PLUS)
    solvers = (
        lambda x: diffuse_spectral(basis, graph, x, 2.0),
        lambda x: diffuse_euler_explicit(L1_PLUS, graph, x, 2.0, 40),
        lambda x: diffuse_euler_implicit(L1_PLUS, graph, x, 2.0, 10),
    )
    for solve in solvers:
        combined: NodeFunction = solve(2.0 * u - 3.0 * v)
        separate: NodeFunction = 2.0 * solve(u) - 3.0 * solve(v)
        assert np.linalg.norm(combined - separate) <= 1e-8 * np.linalg.norm(separate)


def test_semigroup_decay_on_non_bipartite_graph() -> None:
    """||u(tau)||_V <= exp(-lambda_1 tau) ||u0||_V when lambda_1 > 0."""
    from src.services.graph.graph import inner_product_V
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    basis: SpectralBasis = _full_basis(graph, L1_PLUS)
    assert basis.lambdas[0] > 0.1
    rng: np.random.Generator = np.random.default_rng(0)
    for tau in (0.5, 2.0, 10.0):
        u0: NodeFunction = rng.standard_normal(graph.n)
        diffused: NodeFunction = diffuse_spectral(basis, graph, u0, tau)
        before: float = np.sqrt(inner_product_V(graph, u0, u0, 1.0))
        after: float = np.sqrt(inner_product_V(graph, diffused, diffused, 1.0))
        assert after <= np.exp(-basis.lambdas[0] * tau) * before + 1e-8


def test_truncation_error_non_increasing_in_k() -> None:
    """The V-norm gap to the full expansion shrinks as K grows."""
    from src.services.graph.graph import inner_product_V

    graph: Graph = _random_graph(8, 40, 0.1)
    basis: SpectralBasis = _full_basis(graph, L1_PLUS)
    u0: NodeFunction = np.random.default_rng(8).standard_normal(graph.n)
    reference: NodeFunction = diffuse_spectral(basis, graph, u0, 1.0)
    errors: list[float] = []
    for K in range(1, graph.n + 1, 3):
        gap: NodeFunction = diffuse_spectral(basis.truncate(K), graph, u0, 1.0) - reference
        errors.append(inner_product_V(graph, gap, gap, 1.0))
    assert all(later <= earlier + 1e-12 for earlier, later in zip(errors, errors[1:]))


def test_explicit_euler_first_order_convergence() -> None:
    """Ten times more explicit steps cut the error against the exact semigroup about tenfold."""
    for seed in range(3):
        graph: Graph = _random_graph(seed, 25, 0.2)
        basis: SpectralBasis = _full_basis(graph, L1_PLUS)
        u0: NodeFunction = np.random.default_rng(seed).standard_normal(graph.n)
        reference: NodeFunction = diffuse_spectral(basis, graph, u0, 1.0)
        coarse: float = float(
            np.max(np.abs(diffuse_euler_explicit(L1_PLUS, graph, u0, 1.0, 100) - reference)),
        )
        fine: float = float(
            np.max(np.abs(diffuse_euler_explicit(L1_PLUS, graph, u0, 1.0, 1000) - reference)),
        )
        assert 5.0 <= coarse / fine <= 20.0


def test_solver_agreement_explicit() -> None:
    """Full-basis spectral and explicit Euler with M = 1e4 agree within 1e-3."""
    from src.services.operators.operator_kind import L0_PLUS

    kinds: tuple[OperatorKind, ...] = (L0_PLUS, L1_PLUS, LS_PLUS)
    for seed in range(20):
        graph: Graph = _random_graph(seed, 10 + 2 * seed, 0.2)
        kind: OperatorKind = kinds[seed % 3]
        u0: NodeFunction = np.random.default_rng(seed).uniform(-1.0, 1.0, graph.n)
        spectral: NodeFunction = diffuse_spectral(_full_basis(graph, kind), graph, u0, 1.0)
        explicit: NodeFunction = diffuse_euler_explicit(kind, graph, u0, 1.0, 10_000)
        assert np.max(np.abs(spectral - explicit)) <= 1e-3


def test_solver_agreement_implicit() -> None:
    """Implicit Euler with M = 1e4 matches the exact semigroup within 1e-3."""
    from src.services.graph.named_graphs import cycle_graph, petersen_graph
    from src.services.operators.operator_kind import L0_PLUS

    graphs: tuple[Graph, ...] = (
        cycle_graph(5),
        petersen_graph(),
        _random_graph(1, 12, 0.3),
        _random_graph(2, 16, 0.25),
    )
    for index, graph in enumerate(graphs):
        kind: OperatorKind = (L0_PLUS, L1_PLUS, LS_PLUS)[index % 3]
        u0: NodeFunction = np.random.default_rng(index).uniform(-1.0, 1.0, graph.n)
        spectral: NodeFunction = diffuse_spectral(_full_basis(graph, kind), graph, u0, 1.0)
        implicit: NodeFunction = diffuse_euler_implicit(kind, graph, u0, 1.0, 10_000)
        assert np.max(np.abs(spectral - implicit)) <= 1e-3


def test_diffuse_dispatch() -> None:
    """diffuse routes to the solver named by the method and truncates the basis to K."""
    import pytest

    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    basis: SpectralBasis = _full_basis(graph, L1_PLUS)
    u0: NodeFunction = np.linspace(-1.0, 1.0, graph.n)
    spectral: DiffusionMethod = DiffusionMethod(
        variant=DiffusionVariant.SPECTRAL,
        tau=1.0,
        K=3,
    )
    np.testing.assert_allclose(
        diffuse(spectral, L1_PLUS, graph, u0, basis=basis),
        diffuse_spectral(basis.truncate(3), graph, u0, 1.0),
    )
    with pytest.raises(ValueError, match="precomputed basis"):
        diffuse(spectral, L1_PLUS, graph, u0)
    euler: DiffusionMethod = DiffusionMethod(variant=DiffusionVariant.EULER, tau=1.0, M=7)
    assert np.array_equal(
        diffuse(euler, L1_PLUS, graph, u0),
        diffuse_euler_explicit(L1_PLUS, graph, u0, 1.0, 7),
    )
    implicit: DiffusionMethod = DiffusionMethod(
        variant=DiffusionVariant.IMPLICIT,
        tau=1.0,
        dt=0.25,
    )
    np.testing.assert_allclose(
        diffuse(implicit, L1_PLUS, graph, u0),
        diffuse_euler_implicit(L1_PLUS, graph, u0, 1.0, 4),
    )


def integration_test_explicit_euler_cost_scales_with_edges() -> None:
    """Per-step explicit Euler time grows by at most 3x per doubling of |E|."""
    import time

    from src.services.graph.graph import Graph, remove_isolated_nodes

    timings: list[float] = []
    n: int = 5000
    for edges in (10_000, 20_000, 40_000):
        rng: np.random.Generator = np.random.default_rng(edges)
        heads: npt.NDArray[np.int64] = rng.integers(0, n, edges)
        tails: npt.NDArray[np.int64] = (heads + rng.integers(1, n, edges)) % n
        graph: Graph = remove_isolated_nodes(Graph.from_edges(n, heads, tails))
        u0: NodeFunction = rng.uniform(-1.0, 1.0, graph.n)
        diffuse_euler_explicit(L1_PLUS, graph, u0, 1.0, 5)
        start: float = time.perf_counter()
        diffuse_euler_explicit(L1_PLUS, graph, u0, 1.0, 200)
        timings.append((time.perf_counter() - start) / 200)
    assert timings[1] <= 3.0 * timings[0]
    assert timings[2] <= 3.0 * timings[1]


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
