"""Jet arithmetic: truncated Taylor series carrying phases, amplitudes and potentials."""

from equiszego.algebra.jets import (
    Jet,
    jet_add,
    jet_det,
    jet_diff,
    jet_exp,
    jet_log,
    jet_log1p,
    jet_matrix_inverse,
    jet_mul,
    jet_power,
    jet_sqrt,
    jet_sub,
    jet_wirtinger,
    multi_indices,
    wirtinger_derivative_at_zero,
)

__all__ = [
    "Jet",
    "jet_add",
    "jet_det",
    "jet_diff",
    "jet_exp",
    "jet_log",
    "jet_log1p",
    "jet_matrix_inverse",
    "jet_mul",
    "jet_power",
    "jet_sqrt",
    "jet_sub",
    "jet_wirtinger",
    "multi_indices",
    "wirtinger_derivative_at_zero",
]
