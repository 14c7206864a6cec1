from .config import MboConfig, default_K
from .mbo import (
    TRIVIAL_TOLERANCE,
    IterationRecord,
    MboDiffusionError,
    MboTrace,
    TerminationReason,
    detect_trivial,
    mbo_run,
    pinning_bound,
    prepare_basis,
    relative_change,
)
from .multi_run import MultiRunSummary, multi_run, random_initial_condition

__all__ = [
    "TRIVIAL_TOLERANCE",
    "IterationRecord",
    "MboConfig",
    "MboDiffusionError",
    "MboTrace",
    "MultiRunSummary",
    "TerminationReason",
    "default_K",
    "detect_trivial",
    "mbo_run",
    "multi_run",
    "pinning_bound",
    "prepare_basis",
    "random_initial_condition",
    "relative_change",
]
