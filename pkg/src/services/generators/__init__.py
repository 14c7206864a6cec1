from .gen_spec import GenSpec, GraphFamily
from .random_graphs import (
    community_sizes,
    erdos_renyi,
    modular,
    modular_probabilities,
    reweight,
)

__all__ = [
    "GenSpec",
    "GraphFamily",
    "community_sizes",
    "erdos_renyi",
    "modular",
    "modular_probabilities",
    "reweight",
]
