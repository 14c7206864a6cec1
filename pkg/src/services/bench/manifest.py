from __future__ import annotations

import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any

import orjson
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.diffusion.diffusion_method import DiffusionVariant
from src.services.generators.gen_spec import GenSpec
from src.services.graph.edge_list import MergePolicy
from src.services.graph.random_stream import MAX_SEED
from src.services.mbo.config import MboConfig
from src.services.mbo.multi_run import DEFAULT_RUNS
from src.services.operators.operator_kind import L1_PLUS, OperatorKind
from src.services.spectra.spectral_basis import DEFAULT_DENSE_CAP

logger: logging.Logger = logging.getLogger(__name__)

SWEEP_TOLERANCE: float = 1e-9


class SweepParameter(str, Enum):
    K = "K"
    TAU = "tau"

    @classmethod
    def from_string(cls, value: str) -> SweepParameter:
        for member in cls:
            if member.value.lower() == value.strip().lower():
                return member

        valid_values: str = ", ".join([member.value for member in cls])
        error_msg: str = (
            f"Invalid sweep parameter: '{value}'. Valid values are: {valid_values}"
        )
        raise ValueError(error_msg)


class SweepSpec(BaseModel):
    """An increasing range start, start + step, ... up to stop for K or tau."""

    model_config = ConfigDict(frozen=True)

    parameter: SweepParameter
    start: float = Field(gt=0.0)
    stop: float = Field(gt=0.0)
    step: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_range(self) -> SweepSpec:
        if self.stop < self.start:
            error_msg: str = f"Sweep range is empty: stop {self.stop:g} < start {self.start:g}"
            raise ValueError(error_msg)

        if self.parameter is SweepParameter.K and not all(
            float(value).is_integer() for value in (self.start, self.stop, self.step)
        ):
            error_msg = "K sweeps need integer start, stop and step"
            raise ValueError(error_msg)

        return self

    @classmethod
    def from_string(cls: type[SweepSpec], value: str) -> SweepSpec:
        """Parse `K=5:100:5` or `tau=5:50:5`."""
        name, separator, bounds = value.partition("=")
        parts: list[str] = bounds.split(":")
        if not separator or len(parts) != 3:
            error_msg: str = f"Expected a sweep like 'K=5:100:5', got '{value}'"
            raise ValueError(error_msg)

        try:
            start, stop, step = (float(part) for part in parts)

        except ValueError as e:
            error_msg = f"Sweep bounds must be numbers, got '{bounds}'"
            raise ValueError(error_msg) from e

        return cls(
            parameter=SweepParameter.from_string(name),
            start=start,
            stop=stop,
            step=step,
        )

    def values(self) -> list[float]:
        count: int = math.floor((self.stop - self.start) / self.step + SWEEP_TOLERANCE) + 1
        return [self.start + index * self.step for index in range(count)]

    def __str__(self) -> str:
        return f"{self.parameter.value}={self.start:g}:{self.stop:g}:{self.step:g}"


class RunManifest(BaseModel):
    """One experiment: an input graph source, MBO+ parameters and an optional sweep.

    Unset tau and K follow the per-graph defaults of MboConfig.
    """

    model_config = ConfigDict(frozen=True)

    input_path: Path | None = None
    generator: GenSpec | None = None
    realizations: int = Field(default=1, ge=1)
    operator: OperatorKind = L1_PLUS
    solver: DiffusionVariant = DiffusionVariant.SPECTRAL
    tau: float | None = Field(default=None, gt=0.0)
    K: int | None = Field(default=None, ge=1)
    M: int = Field(default=100, ge=1)
    dt: float | None = Field(default=None, gt=0.0)
    eta: float = Field(default=1e-8, gt=0.0)
    epsilon: float = Field(default=1.0, gt=0.0)
    max_iterations: int = Field(default=300, ge=1)
    runs: int = Field(default=DEFAULT_RUNS, ge=1)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    sweep: SweepSpec | None = None
    merge_policy: MergePolicy = MergePolicy.ERROR
    trace_out: Path | None = None
    dense_cap: int = Field(default=DEFAULT_DENSE_CAP, ge=1)

    @field_validator("generator", mode="before")
    @classmethod
    def _parse_generator(cls, value: Any) -> Any:  # noqa: ANN401
        return GenSpec.from_string(value) if isinstance(value, str) else value

    @field_validator("sweep", mode="before")
    @classmethod
    def _parse_sweep(cls, value: Any) -> Any:  # noqa: ANN401
        return SweepSpec.from_string(value) if isinstance(value, str) else value

    @field_validator("operator", mode="before")
    @classmethod
    def _parse_operator(cls, value: Any) -> Any:  # noqa: ANN401
        return OperatorKind.from_string(value) if isinstance(value, str) else value

    @field_validator("solver", mode="before")
    @classmethod
    def _parse_solver(cls, value: Any) -> Any:  # noqa: ANN401
        return DiffusionVariant.from_string(value) if isinstance(value, str) else value

    @field_validator("merge_policy", mode="before")
    @classmethod
    def _parse_merge_policy(cls, value: Any) -> Any:  # noqa: ANN401
        return MergePolicy.from_string(value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def _check_consistency(self) -> RunManifest:
        if (self.input_path is None) == (self.generator is None):
            error_msg: str = "Exactly one input source is required: an input path or a generator"
            raise ValueError(error_msg)

        if self.realizations > 1 and self.generator is None:
            error_msg = "realizations apply to generated graphs only"
            raise ValueError(error_msg)

        if (
            self.sweep is not None
            and self.sweep.parameter is SweepParameter.K
            and self.solver is not DiffusionVariant.SPECTRAL
        ):
            error_msg = "K sweeps need the spectral solver"
            raise ValueError(error_msg)

        # surfaces operator and dt errors at load time
        self.mbo_config()
        return self

    @staticmethod
    def read_json_data(path: Path) -> dict[str, Any]:
        """Raw manifest fields, before validation."""
        if not path.exists():
            error_msg: str = f"Manifest not found at {path}"
            raise FileNotFoundError(error_msg)

        try:
            data: dict[str, Any] = orjson.loads(path.read_bytes())

        except orjson.JSONDecodeError as e:
            error_msg = f"Manifest {path} is not valid JSON: {e}"
            raise ValueError(error_msg) from e

        if not isinstance(data, dict):
            error_msg = f"Manifest {path} must hold a JSON object"
            raise TypeError(error_msg)

        return data

    @classmethod
    def from_json_file(cls: type[RunManifest], path: Path) -> RunManifest:
        return cls.model_validate(cls.read_json_data(path))

    @property
    def input_label(self) -> str:
        if self.generator is not None:
            return self.generator.graph_id
        return str(self.input_path)

    def sweep_values(self) -> list[float | None]:
        return [None] if self.sweep is None else list(self.sweep.values())

    def mbo_config(
        self,
        tau: float | None = None,
        K: int | None = None,  # noqa: N803
    ) -> MboConfig:
        """MboConfig for one sweep point; explicit arguments override the manifest."""
        return MboConfig(
            operator=self.operator,
            method=self.solver,
            tau=tau if tau is not None else self.tau,
            K=K if K is not None else self.K,
            M=self.M,
            dt=self.dt,
            eta=self.eta,
            max_iterations=self.max_iterations,
            seed=self.seed,
            epsilon=self.epsilon,
            dense_cap=self.dense_cap,
            record_iterates=False,
        )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_sweep_spec_values() -> None:
    """K=5:100:5 gives twenty points; tau sweeps may be fractional."""
    k_sweep: SweepSpec = SweepSpec.from_string("K=5:100:5")
    assert k_sweep.parameter is SweepParameter.K
    assert len(k_sweep.values()) == 20
    assert k_sweep.values()[-1] == 100.0
    tau_sweep: SweepSpec = SweepSpec.from_string("tau=0.1:0.3:0.1")
    assert len(tau_sweep.values()) == 3
    assert str(tau_sweep) == "tau=0.1:0.3:0.1"


def test_sweep_spec_rejects_bad_ranges() -> None:
    """Decreasing, malformed and fractional-K sweeps are refused."""
    import pytest

    with pytest.raises(ValueError, match="empty"):
        SweepSpec.from_string("K=10:5:1")
    with pytest.raises(ValueError, match="Expected a sweep"):
        SweepSpec.from_string("K=5:10")
    with pytest.raises(ValueError, match="integer"):
        SweepSpec.from_string("K=5:10:0.5")
    with pytest.raises(ValueError, match="Valid values are: K, tau"):
        SweepSpec.from_string("M=1:2:1")
    with pytest.raises(ValueError):
        SweepSpec.from_string("tau=1:2:0")


def test_manifest_requires_exactly_one_input() -> None:
    """Neither or both input sources fail validation."""
    import pytest

    with pytest.raises(ValueError, match="Exactly one input source"):
        RunManifest()
    with pytest.raises(ValueError, match="Exactly one input source"):
        RunManifest(input_path=Path("graph.txt"), generator="er:n=10,p=0.5")
    with pytest.raises(ValueError, match="realizations"):
        RunManifest(input_path=Path("graph.txt"), realizations=3)


def test_manifest_parses_strings_and_builds_config() -> None:
    """Operator, solver, generator and sweep accept their CLI spellings."""
    from src.services.operators.operator_kind import L0_PLUS

    manifest: RunManifest = RunManifest(
        generator="er:n=50,p=0.2,seed=3",
        operator="l0plus",
        solver="implicit",
        dt=0.0005,
        tau=0.05,
        sweep="tau=0.05:0.1:0.05",
    )
    assert manifest.operator == L0_PLUS
    assert manifest.solver is DiffusionVariant.IMPLICIT
    assert manifest.input_label == "er_n50_p0.2_s3"
    config: MboConfig = manifest.mbo_config(tau=0.1)
    assert config.tau == 0.1
    assert config.dt == 0.0005
    assert manifest.sweep_values() == [0.05, 0.1]


def test_manifest_rejects_inconsistent_parameters() -> None:
    """Standard operators, dt with spectral and K sweeps with Euler are refused."""
    import pytest

    with pytest.raises(ValueError, match="signless"):
        RunManifest(generator="er:n=10,p=0.5", operator="l1")
    with pytest.raises(ValueError, match="Euler solvers only"):
        RunManifest(generator="er:n=10,p=0.5", dt=0.1)
    with pytest.raises(ValueError, match="spectral solver"):
        RunManifest(generator="er:n=10,p=0.5", solver="euler", sweep="K=1:5:1")


def test_manifest_from_json_file() -> None:
    """JSON manifests load through orjson and report bad files."""
    import tempfile

    import pytest

    with tempfile.TemporaryDirectory() as temp_dir:
        path: Path = Path(temp_dir) / "manifest.json"
        path.write_bytes(
            orjson.dumps(
                {
                    "generator": "modular:n=100,c=4,p=0.1,r=0.9,seed=1",
                    "realizations": 5,
                    "runs": 10,
                    "sweep": "K=1:3:1",
                },
            ),
        )
        manifest: RunManifest = RunManifest.from_json_file(path)
        assert manifest.realizations == 5
        assert manifest.sweep is not None
        assert manifest.sweep_values() == [1.0, 2.0, 3.0]

        broken: Path = Path(temp_dir) / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(ValueError, match="not valid JSON"):
            RunManifest.from_json_file(broken)
        with pytest.raises(FileNotFoundError):
            RunManifest.from_json_file(Path(temp_dir) / "missing.json")


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
