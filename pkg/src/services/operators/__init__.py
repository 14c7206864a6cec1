from .laplacian import (
    apply_operator,
    degree_power,
    divergence,
    gradient,
    rayleigh,
    signless_divergence,
    signless_gradient,
    symmetric_dense_matrix,
    symmetric_diagonal,
    symmetric_form,
    symmetric_scaling,
)
from .operator_kind import (
    L0,
    L0_PLUS,
    L1,
    L1_PLUS,
    LS,
    LS_PLUS,
    MBO_OPERATORS,
    NAMED_OPERATORS,
    Family,
    OperatorKind,
)

__all__ = [
    "L0",
    "L0_PLUS",
    "L1",
    "L1_PLUS",
    "LS",
    "LS_PLUS",
    "MBO_OPERATORS",
    "NAMED_OPERATORS",
    "Family",
    "OperatorKind",
    "apply_operator",
    "degree_power",
    "divergence",
    "gradient",
    "rayleigh",
    "signless_divergence",
    "signless_gradient",
    "symmetric_dense_matrix",
    "symmetric_diagonal",
    "symmetric_form",
    "symmetric_scaling",
]
