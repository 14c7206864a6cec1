"""maxcut-bench: run MBO+ experiments, exact oracles, generators and graph summaries.

Exit codes: 0 success, 1 usage, 2 data, 3 numerical failure.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Annotated, Any

import click
import orjson
import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from src.services.bench.experiment import run_manifest
from src.services.bench.manifest import RunManifest
from src.services.bench.results import aggregate_rows, read_result_rows, write_result_rows
from src.services.generators.gen_spec import GenSpec
from src.services.graph.edge_list import MergePolicy, load_edge_list_path, write_edge_list
from src.services.graph.graph import degree_distribution, graph_properties
from src.services.oracle.brute_force import ORACLE_CAP, brute_force_maxcut

if TYPE_CHECKING:
    import polars as pl
    import pytest

    from src.services.bench.results import ResultRow
    from src.services.graph.graph import Graph, GraphProperties
    from src.services.oracle.brute_force import OracleResult

load_dotenv()

DENSE_CAP: int = int(os.environ.get("MAXCUT_DENSE_CAP", "5000"))
WORKERS: int = int(os.environ.get("MAXCUT_WORKERS", "4"))
LOG_LEVEL: str = os.environ.get("MAXCUT_LOG_LEVEL", "INFO").upper()

EXIT_SUCCESS: int = 0
EXIT_USAGE: int = 1
EXIT_DATA: int = 2
EXIT_NUMERICAL: int = 3

logger: logging.Logger = logging.getLogger(__name__)
console: Console = Console(stderr=True)

app: typer.Typer = typer.Typer(
    name="maxcut-bench",
    help="Signless-Laplacian MBO+ Max-Cut experiments.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
    add_completion=False,
)


def _configure_logging() -> None:
    root: logging.Logger = logging.getLogger()
    if any(isinstance(handler, RichHandler) for handler in root.handlers):
        return

    handler: RichHandler = RichHandler(console=console, show_path=False)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root.addHandler(handler)
    root.setLevel(LOG_LEVEL)


def _load_graph(path: Path, merge_policy: str) -> Graph:
    return load_edge_list_path(path, merge_policy=MergePolicy.from_string(merge_policy))


def _manifest_from_flags(manifest_path: Path | None, flags: dict[str, Any]) -> RunManifest:
    """Flags given on the command line override the manifest file."""
    data: dict[str, Any] = {"dense_cap": DENSE_CAP}
    if manifest_path is not None:
        data.update(RunManifest.read_json_data(manifest_path))
    provided: dict[str, Any] = {key: value for key, value in flags.items() if value is not None}
    if "input_path" in provided:
        data.pop("generator", None)
    if "generator" in provided:
        data.pop("input_path", None)

    try:
        return RunManifest.model_validate({**data, **provided})

    except ValidationError as e:
        raise click.UsageError(str(e)) from e


def _summary_table(rows: list[ResultRow]) -> Table:
    table: Table = Table(title="MBO+ results")
    for column in ("graph", "operator", "solver", "tau", "K", "best", "avg", "least", "reason"):
        table.add_column(column, justify="left" if column == "graph" else "right")
    for row in rows:
        table.add_row(
            row.graph,
            row.operator,
            row.solver,
            f"{row.tau:.6g}",
            "" if row.K is None else str(row.K),
            f"{row.best:.6g}",
            f"{row.avg:.6g}",
            f"{row.least:.6g}",
            row.reason,
        )
    return table


@app.command()
def run(  # noqa: PLR0913
    input_path: Annotated[
        Path | None,
        typer.Option("--input", help="Edge-list file or folder of edge-list files."),
    ] = None,
    gen: Annotated[
        str | None,
        typer.Option("--gen", help="Generator spec, e.g. er:n=1000,p=0.01,seed=7."),
    ] = None,
    manifest: Annotated[
        Path | None,
        typer.Option("--manifest", help="JSON run manifest; flags override it."),
    ] = None,
    laplacian: Annotated[
        str | None,
        typer.Option("--laplacian", help="l0plus, l1plus or lsplus."),
    ] = None,
    solver: Annotated[
        str | None,
        typer.Option("--solver", help="spectral, euler or implicit."),
    ] = None,
    tau: Annotated[float | None, typer.Option("--tau")] = None,
    k: Annotated[int | None, typer.Option("--K", help="Number of eigenpairs.")] = None,
    m: Annotated[int | None, typer.Option("--M", help="Euler steps per diffusion.")] = None,
    dt: Annotated[float | None, typer.Option("--dt", help="Euler step size.")] = None,
    eta: Annotated[float | None, typer.Option("--eta")] = None,
    epsilon: Annotated[float | None, typer.Option("--epsilon")] = None,
    max_iterations: Annotated[int | None, typer.Option("--max-iterations")] = None,
    runs: Annotated[int | None, typer.Option("--runs")] = None,
    seed: Annotated[int | None, typer.Option("--seed")] = None,
    sweep: Annotated[
        str | None,
        typer.Option("--sweep", help="K=5:100:5 or tau=5:50:5."),
    ] = None,
    realizations: Annotated[int | None, typer.Option("--realizations")] = None,
    trace_out: Annotated[Path | None, typer.Option("--trace-out")] = None,
    merge_policy: Annotated[str | None, typer.Option("--merge-policy")] = None,
    output: Annotated[
        Path | None,
        typer.Option("--output", help="Append CSV rows here instead of stdout."),
    ] = None,
    workers: Annotated[int, typer.Option("--workers")] = WORKERS,
) -> None:
    """Run best-of-N MBO+ on each input graph and emit one CSV row per sweep point."""
    run_manifest_model: RunManifest = _manifest_from_flags(
        manifest,
        {
            "input_path": input_path,
            "generator": gen,
            "operator": laplacian,
            "solver": solver,
            "tau": tau,
            "K": k,
            "M": m,
            "dt": dt,
            "eta": eta,
            "epsilon": epsilon,
            "max_iterations": max_iterations,
            "runs": runs,
            "seed": seed,
            "sweep": sweep,
            "realizations": realizations,
            "trace_out": trace_out,
            "merge_policy": merge_policy,
        },
    )
    rows: list[ResultRow] = run_manifest(run_manifest_model, workers=workers)
    text: str | None = write_result_rows(rows, output)
    if text is not None:
        typer.echo(text, nl=False)

    console.print(_summary_table(rows))


@app.command()
def oracle(
    input_path: Annotated[Path, typer.Option("--input", help="Edge-list file.")],
    cap: Annotated[int, typer.Option("--cap")] = ORACLE_CAP,
    witness_out: Annotated[Path | None, typer.Option("--witness-out")] = None,
    merge_policy: Annotated[str, typer.Option("--merge-policy")] = MergePolicy.ERROR.value,
    workers: Annotated[int, typer.Option("--workers")] = WORKERS,
) -> None:
    """Exact Max-Cut by exhaustive enumeration for small graphs."""
    graph: Graph = _load_graph(input_path, merge_policy)
    result: OracleResult = brute_force_maxcut(graph, cap=cap, workers=workers)
    typer.echo(f"{result.optimum:.10g}")
    if witness_out is not None:
        labels: tuple[int, ...] = graph.labels or tuple(range(graph.n))
        witness_out.write_bytes(
            orjson.dumps(
                {
                    "optimum": result.optimum,
                    "enumerated": result.enumerated,
                    "witness": {
                        str(label): int(side)
                        for label, side in zip(labels, result.witness.tolist(), strict=True)
                    },
                },
                option=orjson.OPT_INDENT_2,
            ),
        )
        logger.info("Wrote witness to %s", witness_out)


@app.command()
def generate(
    gen: Annotated[str, typer.Option("--gen", help="Generator spec.")],
    out: Annotated[Path, typer.Option("--out", help="Edge-list file to write.")],
    allow_empty: Annotated[
        bool,
        typer.Option("--allow-empty", help="Write graphs without edges too."),
    ] = False,
) -> None:
    """Write a generated graph in the edge-list format `run` reads."""
    try:
        spec: GenSpec = GenSpec.from_string(gen)

    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--gen") from e

    graph: Graph = spec.build()
    if graph.num_edges == 0 and not allow_empty:
        error_msg: str = f"{spec.graph_id} has no edges; pass --allow-empty to write it anyway"
        raise ValueError(error_msg)

    with out.open("w", encoding="utf-8") as file:
        lines: int = write_edge_list(graph, file)

    typer.echo(f"{lines}")
    logger.info("Wrote %s with %d edges to %s", spec.graph_id, lines, out)


@app.command()
def inspect(
    input_path: Annotated[Path, typer.Option("--input", help="Edge-list file.")],
    merge_policy: Annotated[str, typer.Option("--merge-policy")] = MergePolicy.ERROR.value,
) -> None:
    """Print n, |E|, degree extremes and, for unweighted graphs, the degree distribution."""
    graph: Graph = _load_graph(input_path, merge_policy)
    properties: GraphProperties = graph_properties(graph)
    table: Table = Table(title=input_path.name)
    table.add_column("property")
    table.add_column("value", justify="right")
    for name, value in properties._asdict().items():
        table.add_row(name, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)

    if graph.is_unweighted:
        distribution: Table = Table(title="degree distribution")
        distribution.add_column("degree", justify="right")
        distribution.add_column("fraction", justify="right")
        for degree, fraction in degree_distribution(graph).items():
            distribution.add_row(str(degree), f"{fraction:.4f}")
        console.print(distribution)


@app.command()
def aggregate(
    results: Annotated[Path, typer.Option("--results", help="CSV written by `run`.")],
    output: Annotated[Path | None, typer.Option("--output")] = None,
) -> None:
    """Mean and sample standard deviation of best / avg / least per family and sweep point."""
    rows: list[ResultRow] = read_result_rows(results)
    frame: pl.DataFrame = aggregate_rows(rows)
    if output is None:
        typer.echo(frame.write_csv(), nl=False)
    else:
        frame.write_csv(output)
        logger.info("Wrote %d aggregated rows to %s", frame.height, output)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    try:
        app(args=argv, prog_name="maxcut-bench", standalone_mode=False)

    except click.ClickException as e:
        e.show()
        return EXIT_USAGE

    except click.exceptions.Abort:
        return EXIT_USAGE

    except ArithmeticError as e:
        logger.error("Numerical failure: %s", e)  # noqa: TRY400
        return EXIT_NUMERICAL

    except (ValueError, OSError) as e:
        logger.error("Data error: %s", e)  # noqa: TRY400
        return EXIT_DATA

    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _edge_lines(path: Path) -> list[str]:
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def test_generate_complete_graph_and_empty_flag() -> None:
    """ER(10, 1) writes 45 edges; ER(10, 0) needs --allow-empty."""
    import tempfile

    with tempfile.TemporaryDirectory() as temp_dir:
        complete: Path = Path(temp_dir) / "complete.txt"
        assert main(["generate", "--gen", "er:n=10,p=1", "--out", str(complete)]) == 0
        assert len(_edge_lines(complete)) == 45

        empty: Path = Path(temp_dir) / "empty.txt"
        assert main(["generate", "--gen", "er:n=10,p=0", "--out", str(empty)]) == EXIT_DATA
        assert (
            main(["generate", "--gen", "er:n=10,p=0", "--out", str(empty), "--allow-empty"])
            == 0
        )
        assert _edge_lines(empty) == []
        assert main(["generate", "--gen", "ba:n=10", "--out", str(empty)]) == EXIT_USAGE


def test_generate_round_trips_through_loader() -> None:
    """Written graphs load back identical, isolated vertices included."""
    import tempfile

    import numpy as np

    for spec in ("modular:n=100,c=4,p=0.1,r=0.9,seed=3", "er:n=50,p=0.02,seed=1"):
        expected: Graph = GenSpec.from_string(spec).build()
        with tempfile.TemporaryDirectory() as temp_dir:
            path: Path = Path(temp_dir) / "graph.txt"
            assert main(["generate", "--gen", spec, "--out", str(path)]) == 0
            loaded: Graph = load_edge_list_path(path)
        assert loaded.n == expected.n
        assert loaded.num_edges == expected.num_edges
        assert np.array_equal(loaded.adjacency.toarray(), expected.adjacency.toarray())
    assert int(np.sum(expected.degrees == 0)) > 0


def test_run_writes_csv_rows() -> None:
    """run appends rows under the fixed header."""
    import tempfile

    import polars as pl

    with tempfile.TemporaryDirectory() as temp_dir:
        output: Path = Path(temp_dir) / "results.csv"
        argv: list[str] = [
            "run",
            "--gen",
            "er:n=40,p=0.2,seed=3",
            "--runs",
            "3",
            "--K",
            "2",
            "--output",
            str(output),
        ]
        assert main(argv) == 0
        assert main([*argv, "--laplacian", "lsplus"]) == 0
        frame: pl.DataFrame = pl.read_csv(output)
    assert frame.columns[:3] == ["graph", "n", "m"]
    assert frame.height == 2
    assert frame["operator"].to_list() == ["l1plus", "lsplus"]
    assert frame["K"].to_list() == [2, 2]


def test_run_prints_csv_without_output(capsys: pytest.CaptureFixture[str]) -> None:
    """Without --output the CSV goes to stdout."""
    assert main(["run", "--gen", "er:n=30,p=0.3,seed=1", "--runs", "2", "--K", "1"]) == 0
    lines: list[str] = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("graph,n,m,operator,solver")
    assert len(lines) == 2


def test_run_manifest_file_with_flag_override() -> None:
    """Flags override manifest values."""
    import tempfile

    import polars as pl

    with tempfile.TemporaryDirectory() as temp_dir:
        manifest_path: Path = Path(temp_dir) / "manifest.json"
        manifest_path.write_bytes(
            orjson.dumps({"generator": "er:n=30,p=0.3,seed=4", "runs": 2, "K": 1}),
        )
        output: Path = Path(temp_dir) / "results.csv"
        assert (
            main(
                [
                    "run",
                    "--manifest",
                    str(manifest_path),
                    "--K",
                    "3",
                    "--output",
                    str(output),
                ],
            )
            == 0
        )
        assert pl.read_csv(output)["K"].to_list() == [3]


def test_aggregate_collapses_realizations(capsys: pytest.CaptureFixture[str]) -> None:
    """Two realisations of one family aggregate to a single line."""
    import tempfile

    with tempfile.TemporaryDirectory() as temp_dir:
        output: Path = Path(temp_dir) / "results.csv"
        argv: list[str] = [
            "run",
            "--gen",
            "er:n=30,p=0.3,seed=2",
            "--realizations",
            "2",
            "--runs",
            "2",
            "--K",
            "2",
            "--output",
            str(output),
        ]
        assert main(argv) == 0
        capsys.readouterr()
        assert main(["aggregate", "--results", str(output)]) == 0
    lines: list[str] = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("er_n30_p0.3,")
    assert main(["aggregate", "--results", str(output)]) == EXIT_DATA


def test_run_exit_codes() -> None:
    """Bad flags exit 1, missing data exits 2 and a blown-up solver exits 3."""
    import tempfile

    assert main(["run", "--gen", "er:n=10,p=0.5", "--solver", "newton"]) == EXIT_USAGE
    assert main(["run", "--gen", "er:n=10,p=0.5", "--laplacian", "l1"]) == EXIT_USAGE
    assert main(["run"]) == EXIT_USAGE
    with tempfile.TemporaryDirectory() as temp_dir:
        missing: str = str(Path(temp_dir) / "missing.txt")
        assert main(["run", "--input", missing]) == EXIT_DATA
    assert (
        main(
            [
                "run",
                "--gen",
                "er:n=4,p=1",
                "--solver",
                "euler",
                "--tau",
                "1000",
                "--M",
                "10",
                "--runs",
                "2",
            ],
        )
        == EXIT_NUMERICAL
    )


def test_oracle_prints_optimum_and_witness(capsys: pytest.CaptureFixture[str]) -> None:
    """K3 has optimum 2; the witness maps file ids to sides."""
    import tempfile

    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = Path(temp_dir) / "triangle.txt"
        path.write_text("10 20\n20 30\n30 10\n")
        witness: Path = Path(temp_dir) / "witness.json"
        assert main(["oracle", "--input", str(path), "--witness-out", str(witness)]) == 0
        assert capsys.readouterr().out.strip() == "2"
        payload: dict[str, Any] = orjson.loads(witness.read_bytes())
        assert payload["optimum"] == 2.0
        assert payload["enumerated"] == 4
        assert set(payload["witness"]) == {"10", "20", "30"}
        assert main(["oracle", "--input", str(path), "--cap", "2"]) == EXIT_DATA


def test_inspect_reports_properties() -> None:
    """inspect succeeds on a valid file and fails on a malformed one."""
    import tempfile

    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = Path(temp_dir) / "path.txt"
        path.write_text("0 1\n1 2\n2 3\n")
        assert main(["inspect", "--input", str(path)]) == 0
        broken: Path = Path(temp_dir) / "broken.txt"
        broken.write_text("0 1 2 3\n")
        assert main(["inspect", "--input", str(broken)]) == EXIT_DATA


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
