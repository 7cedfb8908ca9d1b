"""Quadrature oracle for oscillatory integrals: composite tensor-product Gauss–Legendre.

Independent of the jet machinery: the phase and amplitude come in as vectorized
callables (e.g. `Jet.to_callable()`), the integrand is cut off smoothly (tau = 1 on
the inner half of the box) and integrated in double precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from equiszego.errors import QuadratureNotConverged

log = logging.getLogger("equiszego.quadrature")

Box = Sequence[tuple[float, float]]


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 24          # Gauss–Legendre nodes per panel
    panels: int = 32         # panels per axis
    rtol: float = 1e-10      # allowed relative change when the node count doubles
    atol: float = 1e-300


@lru_cache(maxsize=32)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def composite_rule(lo: float, hi: float, nodes: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of `panels` equal Gauss–Legendre panels on [lo, hi]."""
    x, w = _gauss_legendre(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cutoff(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Bump equal to 1 on the inner half of [lo, hi], vanishing at the ends."""
    center = 0.5 * (lo + hi)
    radius = 0.5 * (hi - lo)
    t = np.abs(x - center) / radius
    return _smooth_step((1.0 - t) / 0.5)


def _integrate(F_eval: Callable, u_eval: Callable, m: float, domain: Box, nodes: int, panels: int) -> complex:
    axes = [composite_rule(lo, hi, nodes, panels) for lo, hi in domain]
    grids = np.meshgrid(*[pts for pts, _ in axes], indexing="ij")
    weight = np.ones(grids[0].shape)
    for axis, ((pts, wts), (lo, hi)) in enumerate(zip(axes, domain)):
        shape = [1] * len(domain)
        shape[axis] = len(pts)
        weight = weight * (wts * cutoff(pts, lo, hi)).reshape(shape)
    integrand = np.exp(1j * m * F_eval(*grids)) * u_eval(*grids)
    return complex(np.sum(integrand * weight))


def quadrature_oracle(
    F_eval: Callable[..., np.ndarray],
    u_eval: Callable[..., np.ndarray],
    m: float,
    domain: Box,
    config: QuadratureConfig = QuadratureConfig(),
) -> complex:
    """int e^{imF} u tau dx over the box; doubles the per-panel nodes as a convergence check."""
    coarse = _integrate(F_eval, u_eval, m, domain, config.nodes, config.panels)
    fine = _integrate(F_eval, u_eval, m, domain, 2 * config.nodes, config.panels)
    if abs(fine - coarse) > config.rtol * abs(fine) + config.atol:
        raise QuadratureNotConverged(
            f"m={m}: doubling nodes moved the integral by {abs(fine - coarse):.3e} (|I| = {abs(fine):.3e})"
        )
    log.debug("oracle m=%s dims=%d value=%r", m, len(domain), fine)
    return fine
