"""Asymptotics: stationary phase expansion, its quadrature oracle, and coefficient fits."""

from equiszego.asymptotics.fit import (
    ExpansionSamples,
    FitResult,
    fit_coefficients,
    richardson_sequence,
)
from equiszego.asymptotics.quadrature import QuadratureConfig, quadrature_oracle
from equiszego.asymptotics.stationary_phase import (
    PhaseData,
    SPExpansion,
    build_phase,
    lj_apply,
    prefactor_constant,
    sp_expand,
)

__all__ = [
    "ExpansionSamples",
    "FitResult",
    "PhaseData",
    "QuadratureConfig",
    "SPExpansion",
    "build_phase",
    "fit_coefficients",
    "lj_apply",
    "prefactor_constant",
    "quadrature_oracle",
    "richardson_sequence",
    "sp_expand",
]
