from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.diffusion.diffusion_method import DiffusionMethod, DiffusionVariant
from src.services.graph.random_stream import MAX_SEED
from src.services.operators.operator_kind import L0_PLUS, L1_PLUS, LS_PLUS, OperatorKind
from src.services.spectra.spectral_basis import DEFAULT_DENSE_CAP, largest_eigenvalue

if TYPE_CHECKING:
    from src.services.graph.graph import Graph

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_TAU: float = 20.0
# tau = 40 / lambda_n for operators whose spectrum is not confined to [0, 2]
UNNORMALISED_TAU_SCALE: float = 40.0
NODES_PER_EIGENPAIR: int = 100


def default_K(n: int) -> int:  # noqa: N802
    """floor(n / 100) clamped to [1, n]."""
    return min(max(1, n // NODES_PER_EIGENPAIR), max(1, n))


class MboConfig(BaseModel):
    """Parameters of one MBO+ run.

    Unset `tau`, `K` and `lambda_max` are filled per graph by `resolve`.
    """

    model_config = ConfigDict(frozen=True)

    operator: OperatorKind = L1_PLUS
    method: DiffusionVariant = DiffusionVariant.SPECTRAL
    tau: float | None = Field(default=None, gt=0.0)
    K: int | None = Field(default=None, ge=1)
    M: int = Field(default=100, ge=1)
    dt: float | None = Field(default=None, gt=0.0)
    eta: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=300, ge=1)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    epsilon: float = Field(default=1.0, gt=0.0)
    dense_cap: int = Field(default=DEFAULT_DENSE_CAP, ge=1)
    record_iterates: bool = False
    lambda_max: float | None = Field(default=None, gt=0.0)

    @field_validator("operator")
    @classmethod
    def _check_signless(cls, value: OperatorKind) -> OperatorKind:
        if not value.is_signless:
            error_msg: str = f"MBO+ needs a signless operator, got {value}"
            raise ValueError(error_msg)

        return value

    @model_validator(mode="after")
    def _check_dt(self) -> MboConfig:
        if self.dt is not None and self.method is DiffusionVariant.SPECTRAL:
            error_msg: str = "dt applies to the Euler solvers only"
            raise ValueError(error_msg)

        return self

    @property
    def is_resolved(self) -> bool:
        return self.tau is not None and (
            self.method is not DiffusionVariant.SPECTRAL or self.K is not None
        )

    def resolve(self, graph: Graph) -> MboConfig:
        """Fill graph-dependent defaults: K = floor(n/100), tau = 20 or 40 / lambda_n."""
        updates: dict[str, float | int] = {}
        lambda_max: float | None = self.lambda_max
        if lambda_max is None and self.operator not in (L1_PLUS, LS_PLUS):
            lambda_max = largest_eigenvalue(graph, self.operator, seed=self.seed)
            updates["lambda_max"] = lambda_max

        if self.tau is None:
            updates["tau"] = (
                UNNORMALISED_TAU_SCALE / lambda_max
                if lambda_max is not None
                else DEFAULT_TAU
            )

        if self.K is None and self.method is DiffusionVariant.SPECTRAL:
            updates["K"] = default_K(graph.n)

        if self.K is not None and self.K > graph.n:
            error_msg: str = f"K={self.K} exceeds the number of nodes n={graph.n}"
            raise ValueError(error_msg)

        if not updates:
            return self

        resolved: MboConfig = self.model_copy(update=updates)
        logger.debug(
            "Resolved MBO parameters for n=%d: tau=%s K=%s lambda_max=%s",
            graph.n,
            resolved.tau,
            resolved.K,
            resolved.lambda_max,
        )
        return resolved

    def diffusion_method(self) -> DiffusionMethod:
        if self.tau is None:
            error_msg: str = "tau is unset; call resolve(graph) first"
            raise ValueError(error_msg)

        return DiffusionMethod(
            variant=self.method,
            tau=self.tau,
            K=self.K if self.method is DiffusionVariant.SPECTRAL else None,
            M=self.M,
            dt=self.dt,
        )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_default_k() -> None:
    """K = floor(n / 100) clamped to [1, n]."""
    assert default_K(1) == 1
    assert default_K(99) == 1
    assert default_K(1000) == 10
    assert default_K(2550) == 25


def test_config_rejects_standard_operator_and_bad_values() -> None:
    """Only signless operators; eta and seed are range checked."""
    import pytest
    from pydantic import ValidationError

    from src.services.operators.operator_kind import L1

    with pytest.raises(ValidationError, match="signless"):
        MboConfig(operator=L1)
    with pytest.raises(ValidationError):
        MboConfig(eta=0.0)
    with pytest.raises(ValidationError):
        MboConfig(seed=-1)
    with pytest.raises(ValidationError):
        MboConfig(seed=2**64)
    with pytest.raises(ValidationError, match="Euler solvers only"):
        MboConfig(dt=0.1)


def test_resolve_defaults_per_operator() -> None:
    """tau = 20 for the normalised kinds and 40 / lambda_n for Delta_0+."""
    import numpy as np

    from src.services.graph.named_graphs import complete_graph

    triangle: Graph = complete_graph(3)
    normalised: MboConfig = MboConfig().resolve(triangle)
    assert normalised.tau == 20.0
    assert normalised.K == 1
    assert normalised.lambda_max is None
    unnormalised: MboConfig = MboConfig(operator=L0_PLUS).resolve(triangle)
    assert np.isclose(unnormalised.lambda_max, 4.0)
    assert np.isclose(unnormalised.tau, 10.0)
    explicit: MboConfig = MboConfig(method=DiffusionVariant.EULER, tau=3.0).resolve(triangle)
    assert explicit.K is None
    assert explicit.tau == 3.0
    assert explicit.resolve(triangle) is explicit


def test_resolve_rejects_oversized_k() -> None:
    """K larger than n is refused."""
    import pytest

    from src.services.graph.named_graphs import complete_graph

    with pytest.raises(ValueError, match="exceeds"):
        MboConfig(K=5).resolve(complete_graph(3))


def test_diffusion_method_requires_resolution() -> None:
    """An unresolved tau cannot become a DiffusionMethod."""
    import pytest

    with pytest.raises(ValueError, match="resolve"):
        MboConfig().diffusion_method()
    method: DiffusionMethod = MboConfig(
        method=DiffusionVariant.IMPLICIT,
        tau=20.0,
        dt=0.2,
    ).diffusion_method()
    assert method.steps == 100


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
