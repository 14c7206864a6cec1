from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DiffusionVariant(str, Enum):
    SPECTRAL = "spectral"
    EULER = "euler"
    IMPLICIT = "implicit"

    @classmethod
    def from_string(cls, value: str) -> DiffusionVariant:
        try:
            return cls(value.strip().lower())

        except ValueError as e:
            valid_values: str = ", ".join([member.value for member in cls])
            error_msg: str = (
                f"Invalid solver: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg) from e


class DiffusionMethod(BaseModel):
    """How one diffusion step du/dt = -Delta+ u on [0, tau] is solved.

    `K` truncates the spectral expansion (None keeps the whole basis).
    The Euler variants take M steps of size tau / M, or ceil(tau / dt)
    steps when `dt` is given.
    """

    model_config = ConfigDict(frozen=True)

    variant: DiffusionVariant
    tau: float = Field(gt=0.0)
    K: int | None = Field(default=None, ge=1)
    M: int = Field(default=100, ge=1)
    dt: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _check_variant_parameters(self) -> DiffusionMethod:
        if self.variant is DiffusionVariant.SPECTRAL and self.dt is not None:
            error_msg: str = "dt applies to the Euler solvers only"
            raise ValueError(error_msg)

        return self

    @property
    def steps(self) -> int:
        if self.dt is None:
            return self.M

        # rounding keeps tau=20, dt=0.2 at exactly 100 steps
        return max(1, math.ceil(round(self.tau / self.dt, 9)))

    @property
    def step_size(self) -> float:
        return self.tau / self.steps


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_diffusion_variant_from_string() -> None:
    """CLI names map to variants; unknown names list the valid ones."""
    import pytest

    assert DiffusionVariant.from_string("Euler") is DiffusionVariant.EULER
    with pytest.raises(ValueError, match="Valid values are: spectral, euler, implicit"):
        DiffusionVariant.from_string("rk4")


def test_diffusion_method_steps() -> None:
    """M steps by default; dt overrides M with ceil(tau / dt)."""
    method: DiffusionMethod = DiffusionMethod(variant=DiffusionVariant.EULER, tau=20.0)
    assert method.steps == 100
    assert method.step_size == 0.2
    implicit: DiffusionMethod = DiffusionMethod(
        variant=DiffusionVariant.IMPLICIT,
        tau=20.0,
        dt=0.2,
    )
    assert implicit.steps == 100
    short: DiffusionMethod = DiffusionMethod(
        variant=DiffusionVariant.IMPLICIT,
        tau=0.05,
        dt=0.0005,
    )
    assert short.steps == 100
    assert DiffusionMethod(variant=DiffusionVariant.EULER, tau=1.0, dt=0.3).steps == 4


def test_diffusion_method_validation() -> None:
    """tau must be positive, M and K at least 1, dt only for Euler."""
    import pytest
    from pydantic import ValidationError

    with pytest.raises(ValidationError):
        DiffusionMethod(variant=DiffusionVariant.SPECTRAL, tau=0.0)
    with pytest.raises(ValidationError):
        DiffusionMethod(variant=DiffusionVariant.EULER, tau=1.0, M=0)
    with pytest.raises(ValidationError):
        DiffusionMethod(variant=DiffusionVariant.SPECTRAL, tau=1.0, K=0)
    with pytest.raises(ValidationError, match="Euler solvers only"):
        DiffusionMethod(variant=DiffusionVariant.SPECTRAL, tau=1.0, dt=0.1)


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
