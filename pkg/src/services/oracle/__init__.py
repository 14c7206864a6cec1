from .baselines import greedy_local_search, random_cut_baseline
from .brute_force import (
    ORACLE_CAP,
    OracleCapExceededError,
    OracleResult,
    brute_force_maxcut,
)

__all__ = [
    "ORACLE_CAP",
    "OracleCapExceededError",
    "OracleResult",
    "brute_force_maxcut",
    "greedy_local_search",
    "random_cut_baseline",
]
