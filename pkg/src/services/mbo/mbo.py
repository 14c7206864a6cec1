"""MBO+ threshold dynamics: alternate signless diffusion and thresholding to +-1."""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from src.services.diffusion.diffusion_method import DiffusionMethod, DiffusionVariant
from src.services.diffusion.solvers import diffuse
from src.services.functionals.ginzburg_landau import signless_gl_energy
from src.services.graph.cut import edge_scan_cut_size, is_binary, threshold
from src.services.operators.operator_kind import L1_PLUS, LS_PLUS, OperatorKind
from src.services.spectra.spectral_basis import (
    SpectralBasis,
    largest_eigenvalue,
    signless_spectral_basis,
)

if TYPE_CHECKING:
    from src.services.graph.graph import Graph, NodeFunction
    from src.services.mbo.config import MboConfig

logger: logging.Logger = logging.getLogger(__name__)

TRIVIAL_TOLERANCE: float = 1e-13


class TerminationReason(str, Enum):
    TOLERANCE = "tolerance"
    MAX_ITERATIONS = "max_iterations"
    TRIVIAL = "trivial"
    PINNED = "pinned"

    @classmethod
    def from_string(cls, value: str) -> TerminationReason:
        try:
            return cls(value)

        except ValueError as e:
            valid_values: str = ", ".join([member.value for member in cls])
            error_msg: str = (
                f"Invalid termination reason: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg) from e


class MboDiffusionError(ArithmeticError):
    def __init__(self, iteration: int, cause: ArithmeticError) -> None:
        self.iteration: int = iteration
        super().__init__(f"Diffusion failed in MBO iteration {iteration}: {cause}")


class IterationRecord(NamedTuple):
    iteration: int
    cut_size: float
    energy: float
    relative_change: float


class MboTrace(NamedTuple):
    """Per-iteration history of one MBO+ run.

    The initial partition (j = 0) is kept apart and never counts towards the best cut.
    """

    records: tuple[IterationRecord, ...]
    initial_cut_size: float
    initial_energy: float
    best_cut_size: float
    best_iteration: int
    best_partition: NodeFunction
    final_partition: NodeFunction
    reason: TerminationReason
    iterates: tuple[NodeFunction, ...] | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def energies(self) -> list[float]:
        return [record.energy for record in self.records]


def detect_trivial(u_tau: NodeFunction, tolerance: float = TRIVIAL_TOLERANCE) -> bool:
    """True when the diffused function has collapsed to zero."""
    if u_tau.size == 0:
        return True

    return bool(np.max(np.abs(u_tau)) <= tolerance)


def relative_change(previous: NodeFunction, current: NodeFunction) -> float:
    """||mu^j - mu^(j-1)||^2 / ||mu^j||^2 in the plain Euclidean norm."""
    return float(np.sum((current - previous) ** 2) / np.sum(current**2))


def pinning_bound(
    graph: Graph,
    kind: OperatorKind,
    lambda_max: float | None = None,
    seed: int = 0,
) -> float:
    """tau below this value leaves every initial partition unchanged after one step.

    lambda_n^-1 log(1 + d_min^(r/2) / ||chi_V||_V); Delta_s+ is evaluated with r = 1.
    """
    if not kind.is_signless:
        error_msg: str = f"Pinning bound is defined for signless operators, got {kind}"
        raise ValueError(error_msg)

    if lambda_max is None:
        lambda_max = (
            2.0 if kind in (L1_PLUS, LS_PLUS) else largest_eigenvalue(graph, kind, seed=seed)
        )

    r: float = kind.degree_exponent
    degrees: NodeFunction = graph.degrees
    min_degree: float = float(degrees.min())
    norm: float = math.sqrt(float(np.sum(degrees**r)))
    return math.log1p(min_degree ** (r / 2.0) / norm) / lambda_max


def prepare_basis(graph: Graph, config: MboConfig) -> SpectralBasis | None:
    """The spectral basis a resolved config needs, or None for the Euler solvers."""
    if config.method is not DiffusionVariant.SPECTRAL:
        return None

    if config.K is None:
        error_msg: str = "K is unset; call resolve(graph) first"
        raise ValueError(error_msg)

    return signless_spectral_basis(
        graph,
        config.operator,
        config.K,
        seed=config.seed,
        dense_cap=config.dense_cap,
    )


def mbo_run(
    graph: Graph,
    config: MboConfig,
    mu0: NodeFunction,
    basis: SpectralBasis | None = None,
) -> MboTrace:
    if mu0.shape != (graph.n,) or not is_binary(mu0):
        error_msg: str = "The initial partition must be a {-1, 1} vector of length n"
        raise ValueError(error_msg)

    config = config.resolve(graph)
    method: DiffusionMethod = config.diffusion_method()
    if basis is None:
        basis = prepare_basis(graph, config)

    previous: NodeFunction = np.where(mu0 > 0, 1.0, -1.0)
    initial_cut: float = edge_scan_cut_size(graph, previous)
    initial_energy: float = signless_gl_energy(graph, previous, config.epsilon)
    records: list[IterationRecord] = []
    iterates: list[NodeFunction] = []
    best_cut: float = -math.inf
    best_iteration: int = 0
    best_partition: NodeFunction = previous
    reason: TerminationReason = TerminationReason.MAX_ITERATIONS
    for iteration in range(1, config.max_iterations + 1):
        try:
            diffused: NodeFunction = diffuse(
                method,
                config.operator,
                graph,
                previous,
                basis=basis,
                lambda_max=config.lambda_max,
            )

        except ArithmeticError as e:
            raise MboDiffusionError(iteration, e) from e

        current: NodeFunction = threshold(diffused)
        cut: float = edge_scan_cut_size(graph, current)
        change: float = relative_change(previous, current)
        records.append(
            IterationRecord(
                iteration=iteration,
                cut_size=cut,
                energy=signless_gl_energy(graph, current, config.epsilon),
                relative_change=change,
            ),
        )
        if config.record_iterates:
            iterates.append(current)
        if cut > best_cut:
            best_cut, best_iteration, best_partition = cut, iteration, current

        previous = current
        if detect_trivial(diffused):
            reason = TerminationReason.TRIVIAL
            break

        if change < config.eta:
            reason = (
                TerminationReason.PINNED
                if iteration == 1 and change == 0.0
                else TerminationReason.TOLERANCE
            )
            break

    logger.debug(
        "MBO run finished after %d iterations (%s), best cut %.6g at iteration %d",
        len(records),
        reason.value,
        best_cut,
        best_iteration,
    )
    return MboTrace(
        records=tuple(records),
        initial_cut_size=initial_cut,
        initial_energy=initial_energy,
        best_cut_size=best_cut,
        best_iteration=best_iteration,
        best_partition=best_partition,
        final_partition=previous,
        reason=reason,
        iterates=tuple(iterates) if config.record_iterates else None,
    )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_signs(n: int, seed: int) -> NodeFunction:
    rng: np.random.Generator = np.random.default_rng(seed)
    return np.where(rng.random(n) < 0.5, 1.0, -1.0)


def _pinning_fixtures() -> list[Graph]:
    from src.services.graph.graph import Graph
    from src.services.graph.named_graphs import (
        complete_bipartite_graph,
        complete_graph,
        cycle_graph,
        path_graph,
        petersen_graph,
        random_bipartite_graph,
    )

    rng: np.random.Generator = np.random.default_rng(12)
    heads, tails = np.nonzero(np.triu(rng.random((15, 15)) < 0.4, k=1))
    weighted: Graph = Graph.from_edges(
        15,
        np.concatenate([heads, np.arange(14)]),
        np.concatenate([tails, np.arange(1, 15)]),
        rng.uniform(0.5, 2.0, heads.size + 14),
    )
    return [
        complete_graph(2),
        complete_graph(5),
        cycle_graph(5),
        cycle_graph(8),
        path_graph(6),
        petersen_graph(),
        complete_bipartite_graph(3, 4),
        random_bipartite_graph(6, 7, 0.3, seed=1),
        random_bipartite_graph(4, 9, 0.5, seed=2),
        weighted,
    ]


def _full_k_config(graph: Graph, **kwargs: object) -> MboConfig:
    from src.services.mbo.config import MboConfig

    return MboConfig(**{"K": graph.n, **kwargs})


def test_threshold_examples() -> None:
    """Positive entries map to +1, the rest (zero included) to -1."""
    assert np.array_equal(threshold(np.array([0.3, -0.2, 0.0])), [1.0, -1.0, -1.0])
    binary: NodeFunction = np.array([1.0, -1.0, 1.0])
    assert np.array_equal(threshold(binary), binary)
    assert np.array_equal(threshold(np.zeros(3)), -np.ones(3))


def test_detect_trivial() -> None:
    """Zero is trivial, a 1e-3 entry is not."""
    assert detect_trivial(np.zeros(5))
    assert not detect_trivial(np.array([0.0, 1e-3, 0.0]))


def test_pinning_bound_on_k2() -> None:
    """K2 with Delta_1+ gives 1/2 log(1 + 1/sqrt(2))."""
    from src.services.graph.named_graphs import complete_graph

    bound: float = pinning_bound(complete_graph(2), L1_PLUS)
    assert np.isclose(bound, 0.5 * math.log(1.0 + 1.0 / math.sqrt(2.0)))
    assert abs(bound - 0.2674) < 1e-3


def test_pinning_bound_decreases_with_lambda_max() -> None:
    """A larger lambda_n gives a smaller bound; tau = 20 is far above it."""
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    assert pinning_bound(graph, L1_PLUS, lambda_max=4.0) < pinning_bound(graph, L1_PLUS)
    assert pinning_bound(graph, L1_PLUS) < 20.0


def test_pinning_freezes_initial_partition() -> None:
    """One step with tau = 0.9 x bound returns mu^1 = mu^0 for every operator."""
    from src.services.operators.operator_kind import L0_PLUS
    from src.services.spectra.spectral_basis import dense_eigenpairs

    for graph in _pinning_fixtures():
        for kind in (L0_PLUS, L1_PLUS, LS_PLUS):
            basis: SpectralBasis = dense_eigenpairs(graph, kind)
            tau: float = 0.9 * pinning_bound(graph, kind, lambda_max=basis.largest_eigenvalue)
            config: MboConfig = _full_k_config(
                graph,
                operator=kind,
                tau=tau,
                lambda_max=basis.largest_eigenvalue,
                max_iterations=1,
            )
            for seed in range(100):
                mu0: NodeFunction = _random_signs(graph.n, seed)
                trace: MboTrace = mbo_run(graph, config, mu0, basis=basis)
                assert np.array_equal(trace.final_partition, mu0)
                assert trace.reason is TerminationReason.PINNED
                assert trace.records[0].relative_change == 0.0
                assert trace.best_cut_size == trace.initial_cut_size


def test_bipartite_graphs_are_cut_completely() -> None:
    """Spectral MBO+ with tau = 20 cuts every edge of a connected bipartite graph."""
    from src.services.graph.named_graphs import (
        complete_bipartite_graph,
        cycle_graph,
        random_bipartite_graph,
    )

    fixtures: list[Graph] = [
        *(random_bipartite_graph(3 + i, 4 + 2 * i, 0.3, seed=i) for i in range(10)),
        *(cycle_graph(2 * m) for m in range(2, 7)),
        *(complete_bipartite_graph(a, b) for a, b in ((1, 3), (2, 2), (2, 5), (3, 3), (4, 6))),
    ]
    for index, graph in enumerate(fixtures):
        basis: SpectralBasis = signless_spectral_basis(graph, L1_PLUS, 1)
        config: MboConfig = _full_k_config(graph, K=1)
        for seed in range(5):
            mu0: NodeFunction = _random_signs(graph.n, 100 * index + seed)
            if abs(basis.coefficients(graph, mu0)[0]) <= 1e-9:
                continue
            trace: MboTrace = mbo_run(graph, config, mu0, basis=basis)
            assert trace.best_cut_size == graph.total_weight


def test_best_cut_is_maximum_of_records() -> None:
    """s* equals the largest recorded cut and the best partition reproduces it."""
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    config: MboConfig = _full_k_config(graph, tau=2.0, record_iterates=True)
    for seed in range(10):
        trace: MboTrace = mbo_run(graph, config, _random_signs(graph.n, seed))
        assert trace.best_cut_size == max(record.cut_size for record in trace.records)
        assert edge_scan_cut_size(graph, trace.best_partition) == trace.best_cut_size
        assert trace.records[trace.best_iteration - 1].cut_size == trace.best_cut_size
        assert trace.iterates is not None
        assert len(trace.iterates) == trace.iterations


def test_sign_symmetry() -> None:
    """mu0 and -mu0 give mirrored iterates and identical cut sizes."""
    from src.services.graph.named_graphs import petersen_graph

    graph: Graph = petersen_graph()
    config: MboConfig = _full_k_config(graph, tau=1.5, record_iterates=True)
    for seed in range(10):
        mu0: NodeFunction = _random_signs(graph.n, seed)
        forward: MboTrace = mbo_run(graph, config, mu0)
        backward: MboTrace = mbo_run(graph, config, -mu0)
        assert [r.cut_size for r in forward.records] == [r.cut_size for r in backward.records]
        assert forward.iterates is not None
        assert backward.iterates is not None
        for a, b in zip(forward.iterates, backward.iterates, strict=True):
            assert np.array_equal(a, -b)


def test_energy_mostly_non_increasing() -> None:
    """f_eps+(mu^j) does not rise in at least 80% of steps over a small corpus."""
    from src.services.graph.graph import Graph

    steps: int = 0
    non_increasing: int = 0
    for seed in range(10):
        rng: np.random.Generator = np.random.default_rng(seed)
        heads, tails = np.nonzero(np.triu(rng.random((40, 40)) < 0.2, k=1))
        graph: Graph = Graph.from_edges(40, heads, tails)
        if graph.degrees.min() == 0:
            continue
        config: MboConfig = _full_k_config(graph, K=5, max_iterations=50)
        trace: MboTrace = mbo_run(graph, config, _random_signs(graph.n, seed))
        energies: list[float] = [trace.initial_energy, *trace.energies]
        for before, after in zip(energies, energies[1:]):
            steps += 1
            non_increasing += after <= before + 1e-9
    assert steps > 0
    assert non_increasing >= 0.8 * steps


def test_trivial_cut_with_large_tau() -> None:
    """A diffusion that collapses to zero stops with the trivial reason."""
    from src.services.graph.named_graphs import complete_graph
    from src.services.operators.operator_kind import L0_PLUS

    graph: Graph = complete_graph(6)
    config: MboConfig = _full_k_config(graph, operator=L0_PLUS, tau=500.0)
    trace: MboTrace = mbo_run(graph, config, _random_signs(graph.n, 0))
    assert trace.reason is TerminationReason.TRIVIAL
    assert trace.iterations == 1
    assert trace.records[0].cut_size == 0.0


def test_mbo_run_rejects_non_binary_start() -> None:
    """mu0 outside {-1, 1}^n is refused."""
    import pytest

    from src.services.graph.named_graphs import complete_graph

    graph: Graph = complete_graph(3)
    with pytest.raises(ValueError, match="initial partition"):
        mbo_run(graph, _full_k_config(graph), np.array([1.0, 0.0, -1.0]))


def test_diffusion_failure_carries_iteration() -> None:
    """Solver errors surface as MboDiffusionError with the iteration index."""
    import pytest

    from src.services.graph.named_graphs import complete_graph
    from src.services.mbo.config import MboConfig

    graph: Graph = complete_graph(4)
    config: MboConfig = MboConfig(method=DiffusionVariant.EULER, tau=1000.0, M=10)
    with pytest.raises(MboDiffusionError, match="iteration 1") as exc_info:
        mbo_run(graph, config, np.array([1.0, 1.0, 1.0, -1.0]))
    assert exc_info.value.iteration == 1


def test_euler_and_implicit_runs_terminate() -> None:
    """The Euler solvers drive full runs with a valid termination reason."""
    from src.services.graph.named_graphs import petersen_graph
    from src.services.mbo.config import MboConfig

    graph: Graph = petersen_graph()
    for method in (DiffusionVariant.EULER, DiffusionVariant.IMPLICIT):
        config: MboConfig = MboConfig(method=method, tau=2.0, M=20)
        trace: MboTrace = mbo_run(graph, config, _random_signs(graph.n, 3))
        assert trace.reason in set(TerminationReason)
        assert 0.0 <= trace.best_cut_size <= graph.total_weight


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
