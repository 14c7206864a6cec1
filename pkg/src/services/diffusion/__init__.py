from .conjugate_gradient import (
    ConjugateGradientResult,
    ConjugateGradientStagnationError,
    conjugate_gradient,
)
from .diffusion_method import DiffusionMethod, DiffusionVariant
from .solvers import (
    DiffusionBlowUpError,
    diffuse,
    diffuse_euler_explicit,
    diffuse_euler_implicit,
    diffuse_spectral,
    stability_limit,
)

__all__ = [
    "ConjugateGradientResult",
    "ConjugateGradientStagnationError",
    "DiffusionBlowUpError",
    "DiffusionMethod",
    "DiffusionVariant",
    "conjugate_gradient",
    "diffuse",
    "diffuse_euler_explicit",
    "diffuse_euler_implicit",
    "diffuse_spectral",
    "stability_limit",
]
