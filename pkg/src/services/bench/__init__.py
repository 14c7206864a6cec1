from .experiment import LabelledGraph, load_input_graphs, run_graph, run_manifest
from .manifest import RunManifest, SweepParameter, SweepSpec
from .results import (
    RESULT_SCHEMA,
    ResultRow,
    aggregate_rows,
    read_result_rows,
    results_frame,
    write_energy_trace,
    write_result_rows,
)

__all__ = [
    "RESULT_SCHEMA",
    "LabelledGraph",
    "ResultRow",
    "RunManifest",
    "SweepParameter",
    "SweepSpec",
    "aggregate_rows",
    "load_input_graphs",
    "read_result_rows",
    "results_frame",
    "run_graph",
    "run_manifest",
    "write_energy_trace",
    "write_result_rows",
]
