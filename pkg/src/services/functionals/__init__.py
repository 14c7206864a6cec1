from .ginzburg_landau import (
    GammaLimit,
    double_well,
    gamma_limit,
    gl_energy,
    signless_gl_energy,
    signless_total_variation,
    total_variation,
)

__all__ = [
    "GammaLimit",
    "double_well",
    "gamma_limit",
    "gl_energy",
    "signless_gl_energy",
    "signless_total_variation",
    "total_variation",
]
