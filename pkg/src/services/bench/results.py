from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import polars as pl
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.services.diffusion.diffusion_method import DiffusionVariant

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from src.services.graph.graph import Graph
    from src.services.mbo.config import MboConfig
    from src.services.mbo.mbo import MboTrace
    from src.services.mbo.multi_run import MultiRunSummary

logger: logging.Logger = logging.getLogger(__name__)

RESULT_SCHEMA: dict[str, type[pl.DataType]] = {
    "graph": pl.String,
    "n": pl.Int64,
    "m": pl.Int64,
    "operator": pl.String,
    "solver": pl.String,
    "tau": pl.Float64,
    "K": pl.Int64,
    "M": pl.Int64,
    "seed": pl.UInt64,
    "best": pl.Float64,
    "avg": pl.Float64,
    "least": pl.Float64,
    "iters": pl.Int64,
    "time_s": pl.Float64,
    "reason": pl.String,
}
SWEEP_KEYS: list[str] = ["graph_family", "operator", "solver", "tau", "K", "M"]


class ResultRow(BaseModel):
    """One CSV line: a graph, the MBO+ parameters and the multi-run statistics."""

    model_config = ConfigDict(frozen=True)

    graph: str
    n: int = Field(ge=0)
    m: int = Field(ge=0)
    operator: str
    solver: str
    tau: float = Field(gt=0.0)
    K: int | None = Field(default=None, ge=1)
    M: int = Field(ge=1)
    seed: int = Field(ge=0)
    best: float
    avg: float
    least: float
    iters: int = Field(ge=0)
    time_s: float = Field(ge=0.0)
    reason: str

    @model_validator(mode="after")
    def _check_order(self) -> ResultRow:
        if not self.best >= self.avg >= self.least:
            error_msg: str = (
                f"Result row for {self.graph} breaks best >= avg >= least: "
                f"{self.best} / {self.avg} / {self.least}"
            )
            raise ValueError(error_msg)

        return self

    @classmethod
    def from_summary(
        cls: type[ResultRow],
        graph_id: str,
        graph: Graph,
        config: MboConfig,
        summary: MultiRunSummary,
    ) -> ResultRow:
        """`config` must already be resolved for `graph`."""
        spectral: bool = config.method is DiffusionVariant.SPECTRAL
        return cls(
            graph=graph_id,
            n=graph.n,
            m=graph.num_edges,
            operator=config.operator.name,
            solver=config.method.value,
            tau=config.tau,
            K=config.K if spectral else None,
            M=config.M if spectral else config.diffusion_method().steps,
            seed=config.seed,
            best=summary.best,
            avg=summary.avg,
            least=summary.least,
            iters=summary.best_iterations,
            time_s=summary.wall_time_seconds,
            reason=summary.best_reason.value,
        )


def results_frame(rows: Sequence[ResultRow]) -> pl.DataFrame:
    return pl.DataFrame([row.model_dump() for row in rows], schema=RESULT_SCHEMA)


def write_result_rows(rows: Sequence[ResultRow], path: Path | None = None) -> str | None:
    """Append rows to `path` (header only for a new file), or return the CSV text."""
    frame: pl.DataFrame = results_frame(rows)
    if path is None:
        return frame.write_csv()

    new_file: bool = not path.exists() or path.stat().st_size == 0
    with path.open("a", encoding="utf-8", newline="") as file:
        file.write(frame.write_csv(include_header=new_file))

    logger.info("Wrote %d result rows to %s", len(rows), path)
    return None


def read_result_rows(path: Path) -> list[ResultRow]:
    """Rows back from a results CSV, re-validated."""
    if not path.exists():
        error_msg: str = f"Results file not found at {path}"
        raise FileNotFoundError(error_msg)

    frame: pl.DataFrame = pl.read_csv(path, schema=RESULT_SCHEMA)
    return [ResultRow.model_validate(row) for row in frame.iter_rows(named=True)]


def write_energy_trace(trace: MboTrace, path: Path) -> None:
    """Two columns, iteration and energy, starting from the initial partition at 0."""
    pl.DataFrame(
        {
            "iteration": [0, *(record.iteration for record in trace.records)],
            "energy": [trace.initial_energy, *trace.energies],
        },
        schema={"iteration": pl.Int64, "energy": pl.Float64},
    ).write_csv(path)
    logger.info("Wrote energy trace with %d points to %s", trace.iterations + 1, path)


def aggregate_rows(rows: Sequence[ResultRow]) -> pl.DataFrame:
    """Mean and sample standard deviation of best / avg / least per sweep point.

    Rows of one generated family differ only in the trailing seed of their graph id.
    """
    frame: pl.DataFrame = results_frame(rows).with_columns(
        pl.col("graph").str.replace(r"_s\d+$", "").alias("graph_family"),
    )
    statistics: list[pl.Expr] = [pl.len().alias("realizations")]
    for column in ("best", "avg", "least"):
        statistics += [
            pl.col(column).mean().alias(f"{column}_mean"),
            pl.col(column).std(ddof=1).alias(f"{column}_std"),
        ]

    return frame.group_by(SWEEP_KEYS, maintain_order=True).agg(statistics)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _row(**overrides: object) -> ResultRow:
    fields: dict[str, object] = {
        "graph": "er_n10_p0.5_s0",
        "n": 10,
        "m": 20,
        "operator": "l1plus",
        "solver": "spectral",
        "tau": 20.0,
        "K": 1,
        "M": 100,
        "seed": 0,
        "best": 15.0,
        "avg": 14.0,
        "least": 12.0,
        "iters": 3,
        "time_s": 0.01,
        "reason": "tolerance",
    }
    return ResultRow.model_validate({**fields, **overrides})


def test_result_row_orders_statistics() -> None:
    """best >= avg >= least is enforced on every row."""
    import pytest

    with pytest.raises(ValueError, match="best >= avg >= least"):
        _row(best=10.0)


def test_write_result_rows_header_and_append() -> None:
    """The fixed header is written once; later writes only append rows."""
    import tempfile
    from pathlib import Path

    text: str | None = write_result_rows([_row()])
    assert text is not None
    assert text.splitlines()[0] == (
        "graph,n,m,operator,solver,tau,K,M,seed,best,avg,least,iters,time_s,reason"
    )
    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = Path(temp_dir) / "results.csv"
        write_result_rows([_row()], path)
        write_result_rows([_row(seed=1), _row(seed=2, solver="euler", K=None)], path)
        lines: list[str] = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("graph,")
        assert lines[3].split(",")[6] == ""
        frame: pl.DataFrame = pl.read_csv(path)
        assert frame["seed"].to_list() == [0, 1, 2]
        assert [row.K for row in read_result_rows(path)] == [1, 1, None]


def test_write_energy_trace() -> None:
    """The trace starts at iteration 0 with the initial energy."""
    import tempfile
    from pathlib import Path

    import numpy as np

    from src.services.graph.named_graphs import petersen_graph
    from src.services.mbo.config import MboConfig
    from src.services.mbo.mbo import mbo_run

    graph: Graph = petersen_graph()
    mu0: np.ndarray = np.where(np.arange(graph.n) < 5, 1.0, -1.0)
    trace: MboTrace = mbo_run(graph, MboConfig(K=graph.n), mu0)
    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = Path(temp_dir) / "trace.csv"
        write_energy_trace(trace, path)
        frame: pl.DataFrame = pl.read_csv(path)
    assert frame.columns == ["iteration", "energy"]
    assert frame.height == trace.iterations + 1
    assert frame["iteration"][0] == 0
    assert np.isclose(frame["energy"][0], trace.initial_energy, rtol=1e-12)


def test_aggregate_rows_over_realizations() -> None:
    """Realisations of one family and sweep point collapse to mean and std."""
    rows: list[ResultRow] = [
        _row(graph="er_n10_p0.5_s0", best=10.0, avg=9.0, least=8.0),
        _row(graph="er_n10_p0.5_s1", best=12.0, avg=11.0, least=10.0),
        _row(graph="er_n10_p0.5_s0", K=2, best=13.0, avg=12.0, least=11.0),
    ]
    frame: pl.DataFrame = aggregate_rows(rows)
    assert frame.height == 2
    first: dict[str, object] = frame.row(0, named=True)
    assert first["realizations"] == 2
    assert first["best_mean"] == 11.0
    assert abs(first["best_std"] - 2.0**0.5) < 1e-12
    assert frame.row(1, named=True)["best_std"] is None


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
