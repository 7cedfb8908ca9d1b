"""Closed-form expansion coefficients b_0, b_1 of S_{k,m}(p, p) and the local assembly.

Two routes to b_1 meet here:
  - `b1_global`, the closed form in the invariants R, Delta chibar_k, S_G and R_e;
  - `b1_local`, the first stationary-phase correction assembled from the Haar density
    V(0), Delta V(0), the character Laplacian and Delta^2 h(0) in adapted coordinates.
`model_geometry` computes every input at a point of a sphere model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

from mpmath import mp

from equiszego.config import tolerance
from equiszego.geometry.group import HaarChecks, adapted_haar_checks, group_scalar_curvature, laplace_character
from equiszego.geometry.pseudohermitian import (
    normalize_potential,
    orthonormal_directions,
    rigid_scalar_curvature,
    scalar_in_G_direction,
)
from equiszego.models.sphere import (
    SphereModel,
    SpherePoint,
    brt_potential,
    moment_map,
    orbit_delta2h,
    orbit_directions,
    orbit_expansion,
    orbit_metric_jets,
    orbit_volume,
    stabilizer_order,
)

log = logging.getLogger("equiszego.coefficients")


@dataclass(frozen=True)
class GeomInvariants:
    n: int
    d: int
    d_k: int
    V_eff: mp.mpf
    R: mp.mpf
    lap_char: mp.mpf
    S_G: mp.mpf
    R_e: mp.mpf

    def __post_init__(self) -> None:
        if self.V_eff <= 0:
            raise ValueError(f"V_eff must be positive, got {self.V_eff}")
        if not 1 <= self.d <= self.n:
            raise ValueError(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if self.d_k < 1:
            raise ValueError(f"d_k must be positive, got {self.d_k}")


def a0_coefficient(n: int) -> mp.mpf:
    """Leading coefficient of S_m(x, x) ~ a_0 m^n + a_1 m^{n-1} + ...: 1/(2 pi^{n+1})."""
    return 1 / (2 * mp.pi ** (n + 1))


def a1_coefficient(n: int, R: object) -> mp.mpf:
    """R / (4 pi^{n+1}), R the Tanaka-Webster scalar curvature."""
    return mp.mpf(R) / (4 * mp.pi ** (n + 1))


def _common(g: GeomInvariants) -> mp.mpf:
    return mp.pi ** (mp.mpf(g.d) / 2 - g.n - 1) * mp.mpf(2) ** (mp.mpf(g.d) / 2)


def b0(g: GeomInvariants) -> mp.mpf:
    return _common(g) * g.d_k ** 2 / (2 * g.V_eff)


def b1_global(g: GeomInvariants) -> mp.mpf:
    c = _common(g)
    V = g.V_eff
    curvature = c * g.d_k ** 2 / (4 * V) * g.R
    character = c * g.d_k / (4 * V ** (1 + mp.mpf(2) / g.d)) * g.lap_char
    orbit = -c * g.d_k ** 2 / (32 * V) * (2 * V ** (-mp.mpf(2) / g.d) * g.S_G - g.R_e)
    return curvature + character + orbit


def adapted_character_laplacian(lap_char: object, v_eff: object, d: int) -> mp.mpf:
    """Euclidean Laplacian of chibar_k at 0 in adapted coordinates: 2 V_eff^{-2/d} (Delta chibar_k)(e_0)."""
    return 2 * mp.mpf(v_eff) ** (-mp.mpf(2) / d) * mp.mpf(lap_char)


def b1_local(a0: object, a1: object, V0: object, deltaV0: object, lap_char_raw: object,
             delta2h: object, d_k: int, d: int) -> mp.mpf:
    """pi^{d/2} d_k (a1 d_k V0 + a0 V0 lap/4 + a0 d_k DeltaV0/4 + (i/32) a0 V0 d_k Delta^2 h(0))."""
    a0, a1, V0 = mp.mpf(a0), mp.mpf(a1), mp.mpf(V0)
    total = (a1 * d_k * V0
             + a0 * V0 * mp.mpf(lap_char_raw) / 4
             + a0 * d_k * mp.mpf(deltaV0) / 4
             + mp.j / 32 * a0 * V0 * d_k * mp.mpc(delta2h))
    return mp.re(mp.pi ** (mp.mpf(d) / 2) * d_k * total)


def closed_form_delta2h(v_eff: object, d: int, second_derivative_sum: object, S_G: object, R_e: object) -> mp.mpc:
    """i (2 sum_{s,j} d^2_s G_jj + 4 V_eff^{-2/d} S_G - 2 R_e)."""
    value = (2 * mp.mpf(second_derivative_sum)
             + 4 * mp.mpf(v_eff) ** (-mp.mpf(2) / d) * mp.mpf(S_G)
             - 2 * mp.mpf(R_e))
    return mp.j * value


@dataclass(frozen=True, eq=False)
class ModelGeometry:
    """Every geometric input at one point of a model, for one character."""

    k: tuple[int, ...]
    invariants: GeomInvariants
    haar: HaarChecks
    S_L: mp.mpf
    multiplicity: int
    levi_volume_const: mp.mpf
    delta2h_closed: mp.mpc
    delta2h_measured: mp.mpc

    @property
    def a0(self) -> mp.mpf:
        return a0_coefficient(self.invariants.n)

    @property
    def a1(self) -> mp.mpf:
        return a1_coefficient(self.invariants.n, self.invariants.R)

    def lap_raw(self) -> mp.mpf:
        g = self.invariants
        return adapted_character_laplacian(g.lap_char, g.V_eff, g.d)

    def b1_local(self, measured: bool = False) -> mp.mpf:
        g = self.invariants
        delta2h = self.delta2h_measured if measured else self.delta2h_closed
        return b1_local(self.a0, self.a1, self.haar.V0, self.haar.deltaV0, self.lap_raw(), delta2h, g.d_k, g.d)

    def dump(self) -> dict[str, Any]:
        """Every invariant behind b0 and b1, keyed for reports."""
        g = self.invariants
        return {
            "invariants": {"n": g.n, "d": g.d, "d_k": g.d_k, "V_eff": g.V_eff, "R": g.R,
                           "lap_char": g.lap_char, "S_G": g.S_G, "R_e": g.R_e},
            "S_L": self.S_L,
            "levi_volume_const": self.levi_volume_const,
            "stabilizer_order": self.multiplicity,
            "haar": {"V0": self.haar.V0, "deltaV0": self.haar.deltaV0, "rhs": self.haar.rhs},
            "delta2h": {"closed_form": self.delta2h_closed, "measured": self.delta2h_measured},
            "a0": self.a0,
            "a1": self.a1,
        }


def model_geometry(model: SphereModel, k: tuple[int, ...], p: SpherePoint) -> ModelGeometry:
    """Assemble the invariants at p in mu^{-1}(0) from the BRT potential and the orbit."""
    k = tuple(int(v) for v in k)
    residual = max(abs(v) for v in moment_map(model, p))
    if residual > tolerance(0.5):
        log.warning("point is off the zero locus: |mu(p)| = %s", mp.nstr(residual, 5))
    potential = brt_potential(model, p)
    S_L = rigid_scalar_curvature(potential)
    normalized = normalize_potential(potential)
    dirs = orthonormal_directions(normalized, orbit_directions(model, p))
    R_e = scalar_in_G_direction(normalized, dirs)

    v_eff = orbit_volume(model, p)
    metric = orbit_metric_jets(model, p)
    S_G = group_scalar_curvature(metric)
    haar = adapted_haar_checks(metric, v_eff)
    lap = laplace_character(model.torus(p), k)

    invariants = GeomInvariants(n=model.n, d=model.d, d_k=1, V_eff=v_eff, R=S_L / 4,
                                lap_char=lap, S_G=S_G, R_e=R_e)
    geometry = ModelGeometry(
        k=k,
        invariants=invariants,
        haar=haar,
        S_L=S_L,
        multiplicity=stabilizer_order(model, p),
        levi_volume_const=model.levi_volume_const,
        delta2h_closed=closed_form_delta2h(v_eff, model.d, haar.second_derivative_sum, S_G, R_e),
        delta2h_measured=orbit_delta2h(model, p),
    )
    log.info("geometry at p for k=%s: V_eff=%s R=%s R_e=%s lap=%s", k, mp.nstr(v_eff, 12),
             mp.nstr(invariants.R, 12), mp.nstr(R_e, 12), mp.nstr(lap, 12))
    return geometry


def predicted_coefficients(model: SphereModel, k: tuple[int, ...], p: SpherePoint,
                           geometry: ModelGeometry | None = None) -> dict[str, mp.mpf]:
    """b0, both b1 routes, the orbit stationary-phase values and the closed-form defect."""
    geometry = geometry or model_geometry(model, k, p)
    g = geometry.invariants
    orbit = orbit_expansion(model, k, p, jmax=1)
    predicted = {
        "b0": b0(g),
        "b1_global": b1_global(g),
        "b1_local": geometry.b1_local(),
        "b1_local_measured": geometry.b1_local(measured=True),
        "b0_orbit": orbit[0],
        "b1_orbit": orbit[1],
    }
    predicted["closed_form_defect"] = predicted["b1_orbit"] - predicted["b1_global"]
    return predicted
