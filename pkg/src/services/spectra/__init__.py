from .lanczos import (
    LanczosConvergenceError,
    LanczosResult,
    block_lanczos,
)
from .spectral_basis import (
    DEFAULT_DENSE_CAP,
    DenseCapExceededError,
    SpectralBasis,
    count_zero_modes,
    dense_eigenpairs,
    dense_signless_eigenpairs,
    estimate_largest_eigenvalue,
    largest_eigenvalue,
    signless_spectral_basis,
    smallest_signless_eigenpairs,
)

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DenseCapExceededError",
    "LanczosConvergenceError",
    "LanczosResult",
    "SpectralBasis",
    "block_lanczos",
    "count_zero_modes",
    "dense_eigenpairs",
    "dense_signless_eigenpairs",
    "estimate_largest_eigenvalue",
    "largest_eigenvalue",
    "signless_spectral_basis",
    "smallest_signless_eigenpairs",
]
