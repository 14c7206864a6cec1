"""Runs a manifest: load or generate graphs, sweep K or tau, collect result rows."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

from src.services.bench.manifest import RunManifest, SweepParameter
from src.services.bench.results import ResultRow, write_energy_trace
from src.services.graph.edge_list import load_edge_list_path
from src.services.graph.graph import Graph, remove_isolated_nodes
from src.services.local.filesystem import EDGE_LIST_EXTENSIONS, FileUtility
from src.services.mbo.config import MboConfig
from src.services.mbo.mbo import prepare_basis
from src.services.mbo.multi_run import DEFAULT_WORKERS, MultiRunSummary, multi_run

if TYPE_CHECKING:
    from pathlib import Path

    from pytest_mock import MockerFixture

    from src.services.generators.gen_spec import GenSpec
    from src.services.spectra.spectral_basis import SpectralBasis

logger: logging.Logger = logging.getLogger(__name__)


class LabelledGraph(NamedTuple):
    graph_id: str
    graph: Graph


def load_input_graphs(manifest: RunManifest) -> list[LabelledGraph]:
    """Every graph the manifest names, with isolated nodes removed."""
    if manifest.generator is not None:
        graphs: list[LabelledGraph] = []
        for index in range(manifest.realizations):
            spec: GenSpec = manifest.generator.realization(index)
            graphs.append(LabelledGraph(spec.graph_id, remove_isolated_nodes(spec.build())))
        return graphs

    path: Path = manifest.input_path
    paths: list[Path] = (
        list(FileUtility.get_paths(path, EDGE_LIST_EXTENSIONS)) if path.is_dir() else [path]
    )
    if not paths:
        error_msg: str = f"No edge-list files found in {path}"
        raise ValueError(error_msg)

    return [
        LabelledGraph(
            FileUtility.graph_id_from_path(file_path),
            remove_isolated_nodes(
                load_edge_list_path(file_path, merge_policy=manifest.merge_policy),
            ),
        )
        for file_path in paths
    ]


def _point_config(
    base: MboConfig,
    graph: Graph,
    parameter: SweepParameter | None,
    value: float | None,
) -> MboConfig:
    if parameter is None or value is None:
        return base

    match parameter:
        case SweepParameter.K:
            update: dict[str, float | int] = {"K": int(value)}
        case SweepParameter.TAU:
            update = {"tau": value}

    return MboConfig.model_validate({**base.model_dump(), **update}).resolve(graph)


def _trace_path(base: Path, graph_id: str, label: str | None, single: bool) -> Path:  # noqa: FBT001
    if single:
        return base
    suffix: str = f"_{graph_id}" + (f"_{label}" if label else "")
    return base.with_name(f"{base.stem}{suffix}{base.suffix}")


def run_graph(
    manifest: RunManifest,
    labelled: LabelledGraph,
    workers: int = DEFAULT_WORKERS,
    single_trace: bool = True,  # noqa: FBT001,FBT002
) -> list[ResultRow]:
    """One row per sweep point; a K sweep solves the eigenproblem once at the largest K."""
    graph: Graph = labelled.graph
    parameter: SweepParameter | None = (
        manifest.sweep.parameter if manifest.sweep is not None else None
    )
    values: list[float | None] = manifest.sweep_values()
    base: MboConfig = manifest.mbo_config().resolve(graph)
    basis: SpectralBasis | None = prepare_basis(
        graph,
        _point_config(base, graph, parameter, max(values) if parameter else None),
    )

    rows: list[ResultRow] = []
    for value in values:
        config: MboConfig = _point_config(base, graph, parameter, value)
        point_basis: SpectralBasis | None = (
            basis.truncate(config.K)
            if basis is not None and config.K is not None
            else basis
        )
        summary: MultiRunSummary = multi_run(
            graph,
            config,
            runs=manifest.runs,
            basis=point_basis,
            workers=workers,
        )
        rows.append(ResultRow.from_summary(labelled.graph_id, graph, config, summary))
        if manifest.trace_out is not None:
            label: str | None = (
                f"{parameter.value}{value:g}" if parameter is not None else None
            )
            write_energy_trace(
                summary.traces[summary.best_run],
                _trace_path(
                    manifest.trace_out,
                    labelled.graph_id,
                    label,
                    single=single_trace and len(values) == 1,
                ),
            )

    return rows


def run_manifest(
    manifest: RunManifest,
    workers: int = DEFAULT_WORKERS,
) -> list[ResultRow]:
    graphs: list[LabelledGraph] = load_input_graphs(manifest)
    rows: list[ResultRow] = []
    for labelled in graphs:
        logger.info(
            "Running %s on %s (n=%d, |E|=%d)",
            manifest.operator,
            labelled.graph_id,
            labelled.graph.n,
            labelled.graph.num_edges,
        )
        rows += run_graph(manifest, labelled, workers, single_trace=len(graphs) == 1)

    return rows


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _write_graph(graph: Graph, path: Path) -> Path:
    from src.services.graph.edge_list import write_edge_list

    with path.open("w", encoding="utf-8") as file:
        write_edge_list(graph, file)
    return path


def test_bipartite_file_is_cut_completely() -> None:
    """Default spectral MBO+ cuts every edge of a connected bipartite graph."""
    import tempfile
    from pathlib import Path

    from src.services.graph.named_graphs import random_bipartite_graph

    graph: Graph = random_bipartite_graph(8, 11, 0.3, seed=2)
    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = _write_graph(graph, Path(temp_dir) / "bipartite.txt")
        rows: list[ResultRow] = run_manifest(RunManifest(input_path=path, runs=5))
    assert len(rows) == 1
    assert rows[0].graph == "bipartite"
    assert rows[0].best == graph.num_edges
    assert rows[0].K == 1
    assert rows[0].tau == 20.0


def test_tau_below_pinning_bound_reports_pinned() -> None:
    """A tiny tau with the full basis returns every initial partition unchanged."""
    import tempfile
    from pathlib import Path

    from src.services.graph.named_graphs import petersen_graph
    from src.services.mbo.mbo import pinning_bound
    from src.services.operators.operator_kind import L1_PLUS

    graph: Graph = petersen_graph()
    tau: float = 0.9 * pinning_bound(graph, L1_PLUS)
    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = _write_graph(graph, Path(temp_dir) / "petersen.txt")
        rows: list[ResultRow] = run_manifest(
            RunManifest(input_path=path, runs=4, K=graph.n, tau=tau),
        )
    assert rows[0].reason == "pinned"
    assert rows[0].iters == 1


def test_k_sweep_reuses_one_basis(mocker: MockerFixture) -> None:
    """A K sweep gives one row per value and a single eigensolve."""
    import src.services.mbo.mbo as mbo_module

    manifest: RunManifest = RunManifest(
        generator="er:n=60,p=0.2,seed=1",
        runs=3,
        sweep="K=1:4:1",
    )
    solve = mocker.patch.object(
        mbo_module,
        "signless_spectral_basis",
        wraps=mbo_module.signless_spectral_basis,
    )
    rows: list[ResultRow] = run_manifest(manifest, workers=2)
    assert [row.K for row in rows] == [1, 2, 3, 4]
    assert solve.call_count == 1
    assert all(row.best >= row.avg >= row.least for row in rows)


def test_tau_sweep_and_realizations() -> None:
    """Each realisation gets one row per tau value."""
    manifest: RunManifest = RunManifest(
        generator="modular:n=40,c=2,p=0.3,r=0.8,seed=5",
        realizations=2,
        runs=2,
        K=3,
        sweep="tau=5:15:5",
    )
    rows: list[ResultRow] = run_manifest(manifest)
    assert len(rows) == 6
    assert [row.tau for row in rows[:3]] == [5.0, 10.0, 15.0]
    assert {row.graph for row in rows} == {
        "modular_n40_p0.3_c2_r0.8_s5",
        "modular_n40_p0.3_c2_r0.8_s6",
    }


def test_euler_rows_have_no_k() -> None:
    """Euler rows leave K empty and report the step count as M."""
    rows: list[ResultRow] = run_manifest(
        RunManifest(generator="er:n=30,p=0.3,seed=2", solver="euler", tau=1.0, M=50, runs=2),
    )
    assert rows[0].K is None
    assert rows[0].M == 50
    assert rows[0].solver == "euler"


def test_folder_input_and_trace_files() -> None:
    """Every edge-list file in a folder is run and traced separately."""
    import tempfile
    from pathlib import Path

    from src.services.graph.named_graphs import cycle_graph, petersen_graph

    with tempfile.TemporaryDirectory() as temp_dir:
        folder: Path = Path(temp_dir) / "graphs"
        folder.mkdir()
        _write_graph(petersen_graph(), folder / "petersen.txt")
        _write_graph(cycle_graph(7), folder / "cycle.txt")
        trace: Path = Path(temp_dir) / "trace.csv"
        rows: list[ResultRow] = run_manifest(
            RunManifest(input_path=folder, runs=2, K=3, trace_out=trace),
        )
        assert [row.graph for row in rows] == ["cycle", "petersen"]
        assert (Path(temp_dir) / "trace_cycle.csv").exists()
        assert (Path(temp_dir) / "trace_petersen.csv").exists()


def test_empty_folder_is_a_data_error() -> None:
    """A folder without edge lists is rejected."""
    import tempfile
    from pathlib import Path

    import pytest

    with tempfile.TemporaryDirectory() as temp_dir, pytest.raises(
        ValueError,
        match="No edge-list files",
    ):
        load_input_graphs(RunManifest(input_path=Path(temp_dir)))


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
