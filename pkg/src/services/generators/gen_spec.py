from __future__ import annotations

import logging
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.services.generators.random_graphs import erdos_renyi, modular, reweight
from src.services.graph.graph import Graph
from src.services.graph.random_stream import MAX_SEED

logger: logging.Logger = logging.getLogger(__name__)

SPEC_KEYS: tuple[str, ...] = ("n", "p", "c", "r", "seed", "w")


class GraphFamily(str, Enum):
    ERDOS_RENYI = "er"
    MODULAR = "modular"

    @classmethod
    def from_string(cls, value: str) -> GraphFamily:
        try:
            return cls(value.strip().lower())

        except ValueError as e:
            valid_values: str = ", ".join([member.value for member in cls])
            error_msg: str = (
                f"Invalid graph family: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg) from e


class GenSpec(BaseModel):
    """A generated graph family plus seed, optionally reweighted by uniform factors."""

    model_config = ConfigDict(frozen=True)

    family: GraphFamily
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    c: int | None = Field(default=None, ge=1)
    r: float | None = Field(default=None, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    weight_range: tuple[float, float] | None = None

    @model_validator(mode="after")
    def _check_family_parameters(self) -> GenSpec:
        match self.family:
            case GraphFamily.MODULAR:
                if self.c is None or self.r is None:
                    error_msg: str = "Modular graphs need both c and r"
                    raise ValueError(error_msg)

                if self.c > self.n:
                    error_msg = f"c={self.c} exceeds n={self.n}"
                    raise ValueError(error_msg)

                if self.p == 0.0:
                    error_msg = "Modular graphs need p > 0"
                    raise ValueError(error_msg)

            case GraphFamily.ERDOS_RENYI:
                if self.c is not None or self.r is not None:
                    error_msg = "c and r apply to modular graphs only"
                    raise ValueError(error_msg)

        if self.weight_range is not None:
            lo, hi = self.weight_range
            if not 0.0 <= lo <= hi or hi <= 0.0:
                error_msg = f"Weight range needs 0 <= lo <= hi and hi > 0, got {lo}:{hi}"
                raise ValueError(error_msg)

        return self

    @classmethod
    def from_string(cls: type[GenSpec], value: str) -> GenSpec:
        """Parse `family:key=value,...`, e.g. `modular:n=2500,c=2,p=0.009,r=0.8,w=0:2`."""
        family_text, _, parameter_text = value.partition(":")
        family: GraphFamily = GraphFamily.from_string(family_text)
        fields: dict[str, object] = {"family": family}
        for item in filter(None, (part.strip() for part in parameter_text.split(","))):
            key, separator, raw = item.partition("=")
            if not separator:
                error_msg: str = f"Expected key=value in generator spec, got '{item}'"
                raise ValueError(error_msg)

            key = key.strip()
            if key not in SPEC_KEYS:
                error_msg = (
                    f"Unknown generator parameter '{key}'. "
                    f"Valid values are: {', '.join(SPEC_KEYS)}"
                )
                raise ValueError(error_msg)

            try:
                match key:
                    case "n" | "c" | "seed":
                        fields[key] = int(raw)
                    case "p" | "r":
                        fields[key] = float(raw)
                    case "w":
                        lo_text, _, hi_text = raw.partition(":")
                        fields["weight_range"] = (float(lo_text), float(hi_text))

            except ValueError as e:
                error_msg = f"Invalid value for '{key}' in generator spec: '{raw}'"
                raise ValueError(error_msg) from e

        return cls.model_validate(fields)

    def realization(self, index: int) -> GenSpec:
        """Realisation k of a family uses seed + k."""
        return self.model_copy(update={"seed": self.seed + index})

    @property
    def graph_id(self) -> str:
        parts: list[str] = [self.family.value, f"n{self.n}", f"p{self.p:g}"]
        if self.family is GraphFamily.MODULAR:
            parts += [f"c{self.c}", f"r{self.r:g}"]
        if self.weight_range is not None:
            parts.append(f"w{self.weight_range[0]:g}-{self.weight_range[1]:g}")
        parts.append(f"s{self.seed}")
        return "_".join(parts)

    def build(self) -> Graph:
        match self.family:
            case GraphFamily.ERDOS_RENYI:
                graph: Graph = erdos_renyi(self.n, self.p, self.seed)
            case GraphFamily.MODULAR:
                graph = modular(self.n, self.c, self.p, self.r, self.seed)

        if self.weight_range is not None:
            graph = reweight(graph, *self.weight_range, seed=self.seed)

        logger.info(
            "Generated %s: n=%d |E|=%d",
            self.graph_id,
            graph.n,
            graph.num_edges,
        )
        return graph


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_gen_spec_from_string() -> None:
    """Compact specs parse into validated models."""
    er: GenSpec = GenSpec.from_string("er:n=1000,p=0.01,seed=7")
    assert er.family is GraphFamily.ERDOS_RENYI
    assert (er.n, er.p, er.seed) == (1000, 0.01, 7)
    assert er.weight_range is None
    weighted: GenSpec = GenSpec.from_string("modular:n=2500,c=2,p=0.009,r=0.8,w=0:2")
    assert weighted.c == 2
    assert weighted.r == 0.8
    assert weighted.weight_range == (0.0, 2.0)


def test_gen_spec_rejects_invalid_specs() -> None:
    """Unknown families, keys and values fail with the offending text."""
    import pytest

    with pytest.raises(ValueError, match="Valid values are: er, modular"):
        GenSpec.from_string("ba:n=10,p=0.1")
    with pytest.raises(ValueError, match="Unknown generator parameter"):
        GenSpec.from_string("er:n=10,q=0.1")
    with pytest.raises(ValueError, match="Invalid value for 'n'"):
        GenSpec.from_string("er:n=ten,p=0.1")
    with pytest.raises(ValueError, match="c and r"):
        GenSpec.from_string("modular:n=10,p=0.1,c=2")
    with pytest.raises(ValueError):
        GenSpec.from_string("er:n=10,p=1.5")
    with pytest.raises(ValueError, match="Weight range"):
        GenSpec.from_string("er:n=10,p=0.1,w=2:1")


def test_gen_spec_graph_id_and_realizations() -> None:
    """Realisation k adds k to the seed and shows up in the id."""
    spec: GenSpec = GenSpec.from_string("modular:n=100,c=4,p=0.1,r=0.9,seed=3,w=0:2")
    assert spec.graph_id == "modular_n100_p0.1_c4_r0.9_w0-2_s3"
    assert spec.realization(2).seed == 5
    assert spec.realization(2).graph_id.endswith("_s5")


def test_gen_spec_build_is_deterministic() -> None:
    """Same spec, same graph; weights come from the requested range."""
    import numpy as np

    spec: GenSpec = GenSpec.from_string("er:n=60,p=0.2,seed=4,w=0:2")
    first: Graph = spec.build()
    second: Graph = spec.build()
    assert np.array_equal(first.adjacency.data, second.adjacency.data)
    assert np.array_equal(first.adjacency.indices, second.adjacency.indices)
    assert np.all(first.adjacency.data <= 2.0)
    complete: Graph = GenSpec.from_string("er:n=10,p=1").build()
    assert complete.num_edges == 45


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
