"""Exact models: the sphere with a torus action."""

from equiszego.models.sphere import (
    OrbitPhase,
    SphereModel,
    SpherePoint,
    brt_potential,
    find_zero_point,
    group_integral_km,
    hardy_norm,
    kernel_table,
    moment_map,
    orbit_delta2h,
    orbit_expansion,
    orbit_phase,
    orbit_volume,
    slice_indices,
    slice_nonempty,
    stabilizer_order,
    szego_km_diag,
    szego_m_diag,
    szego_m_kernel,
)

__all__ = [
    "OrbitPhase",
    "SphereModel",
    "SpherePoint",
    "brt_potential",
    "find_zero_point",
    "group_integral_km",
    "hardy_norm",
    "kernel_table",
    "moment_map",
    "orbit_delta2h",
    "orbit_expansion",
    "orbit_phase",
    "orbit_volume",
    "slice_indices",
    "slice_nonempty",
    "stabilizer_order",
    "szego_km_diag",
    "szego_m_diag",
    "szego_m_kernel",
]
