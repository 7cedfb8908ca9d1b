"""Pseudohermitian invariants of a CR potential and the torus-side geometry."""

from equiszego.geometry.group import (
    Character,
    HaarChecks,
    TorusGroup,
    adapted_haar_checks,
    christoffel_symbols,
    group_scalar_curvature,
    haar_integrate,
    laplace_character,
)
from equiszego.geometry.pseudohermitian import (
    NormalizedPotential,
    PotentialJet,
    chern_curvature_entry,
    levi_form,
    normalize_potential,
    orthonormal_directions,
    rigid_scalar_curvature,
    scalar_in_G_direction,
    tw_scalar_curvature,
)

__all__ = [
    "Character",
    "HaarChecks",
    "NormalizedPotential",
    "PotentialJet",
    "TorusGroup",
    "adapted_haar_checks",
    "chern_curvature_entry",
    "christoffel_symbols",
    "group_scalar_curvature",
    "haar_integrate",
    "laplace_character",
    "levi_form",
    "normalize_potential",
    "orthonormal_directions",
    "rigid_scalar_curvature",
    "scalar_in_G_direction",
    "tw_scalar_curvature",
]
