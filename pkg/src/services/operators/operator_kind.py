from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class Family(str, Enum):
    STANDARD = "standard"
    SIGNLESS = "signless"

    @classmethod
    def from_string(cls, value: str) -> Family:
        try:
            return cls(value)

        except ValueError as e:
            valid_values: str = ", ".join([member.value for member in cls])
            error_msg: str = (
                f"Invalid operator family: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg) from e


class OperatorKind(BaseModel):
    """A graph Laplacian: standard or signless, r-normalised or symmetric.

    `r is None` selects the symmetric normalisation I -/+ D^-1/2 A D^-1/2.
    """

    model_config = ConfigDict(frozen=True)

    family: Family
    r: float | None = Field(default=None, ge=0.0, le=1.0)

    @classmethod
    def standard(cls: type[OperatorKind], r: float | None) -> OperatorKind:
        return cls(family=Family.STANDARD, r=r)

    @classmethod
    def signless(cls: type[OperatorKind], r: float | None) -> OperatorKind:
        return cls(family=Family.SIGNLESS, r=r)

    @classmethod
    def from_string(cls: type[OperatorKind], value: str) -> OperatorKind:
        kind: OperatorKind | None = NAMED_OPERATORS.get(value.strip().lower())
        if kind is None:
            valid_values: str = ", ".join(NAMED_OPERATORS)
            error_msg: str = (
                f"Invalid operator: '{value}'. Valid values are: {valid_values}"
            )
            raise ValueError(error_msg)

        return kind

    @property
    def is_signless(self) -> bool:
        return self.family is Family.SIGNLESS

    @property
    def is_symmetric(self) -> bool:
        return self.r is None

    @property
    def inner_product_r(self) -> float | None:
        """r of the V inner product the operator is self-adjoint in; None is Euclidean."""
        return self.r

    @property
    def degree_exponent(self) -> float:
        """r that enters degree-weighted norms, with the symmetric kinds read as r=1."""
        return 1.0 if self.r is None else self.r

    @property
    def name(self) -> str:
        suffix: str = "plus" if self.is_signless else ""
        match self.r:
            case None:
                return f"ls{suffix}"
            case 0.0:
                return f"l0{suffix}"
            case 1.0:
                return f"l1{suffix}"
            case _:
                return f"l{self.r:g}{suffix}"

    def mirror(self) -> OperatorKind:
        family: Family = Family.STANDARD if self.is_signless else Family.SIGNLESS
        return OperatorKind(family=family, r=self.r)

    def __str__(self) -> str:
        return self.name


L0: OperatorKind = OperatorKind.standard(0.0)
L1: OperatorKind = OperatorKind.standard(1.0)
LS: OperatorKind = OperatorKind.standard(None)
L0_PLUS: OperatorKind = OperatorKind.signless(0.0)
L1_PLUS: OperatorKind = OperatorKind.signless(1.0)
LS_PLUS: OperatorKind = OperatorKind.signless(None)

NAMED_OPERATORS: dict[str, OperatorKind] = {
    kind.name: kind for kind in (L0, L1, LS, L0_PLUS, L1_PLUS, LS_PLUS)
}
MBO_OPERATORS: tuple[OperatorKind, ...] = (L0_PLUS, L1_PLUS, LS_PLUS)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_named_operators() -> None:
    """The six concrete kinds have the CLI names."""
    assert list(NAMED_OPERATORS) == ["l0", "l1", "ls", "l0plus", "l1plus", "lsplus"]
    assert OperatorKind.from_string("L1PLUS") == L1_PLUS
    assert L1_PLUS.is_signless
    assert LS_PLUS.is_symmetric
    assert not L0.is_symmetric


def test_from_string_lists_valid_values() -> None:
    """Unknown names raise ValueError listing the valid ones."""
    import pytest

    with pytest.raises(ValueError, match="Valid values are: l0, l1, ls"):
        OperatorKind.from_string("l2plus")


def test_r_is_validated() -> None:
    """r outside [0, 1] fails validation."""
    import pytest
    from pydantic import ValidationError

    with pytest.raises(ValidationError):
        OperatorKind.signless(1.5)


def test_mirror_and_hashing() -> None:
    """Mirroring swaps the family; kinds are hashable value objects."""
    assert L1_PLUS.mirror() == L1
    assert LS.mirror() == LS_PLUS
    assert {L1_PLUS, OperatorKind.signless(1.0)} == {L1_PLUS}
    assert OperatorKind.signless(0.5).name == "l0.5plus"
    assert LS_PLUS.degree_exponent == 1.0
    assert LS_PLUS.inner_product_r is None


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
