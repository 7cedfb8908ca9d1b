"""Torus side of the expansion: Haar measure, characters, the character Laplacian,
scalar curvature of a metric jet and the adapted Haar density checks."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from mpmath import mp

from equiszego.algebra.jets import Jet, jet_det, jet_diff, jet_matrix_inverse, jet_mul, jet_sqrt, unit_index
from equiszego.config import tolerance
from equiszego.errors import MismatchedVariables, NormalizationViolated, NotPositiveDefinite

log = logging.getLogger("equiszego.group")

JetMatrix = Sequence[Sequence[Jet]]


@dataclass(frozen=True, eq=False)
class TorusGroup:
    """G = T^d in angle coordinates theta in [0, 2 pi)^d with Haar probability dtheta / (2 pi)^d.

    `gram` is the constant orbit metric in angle coordinates and `covolume` the volume
    of a fundamental domain of the effective action; both default to the standard torus.
    """

    d: int
    gram: mp.matrix | None = None
    covolume: mp.mpf | None = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"torus dimension must be positive, got {self.d}")
        if self.gram is not None and (self.gram.rows, self.gram.cols) != (self.d, self.d):
            raise MismatchedVariables(f"gram is {self.gram.rows}x{self.gram.cols} for d={self.d}")

    @property
    def metric(self) -> mp.matrix:
        return mp.eye(self.d) if self.gram is None else self.gram

    @property
    def fundamental_volume(self) -> mp.mpf:
        return (2 * mp.pi) ** self.d if self.covolume is None else mp.mpf(self.covolume)


@dataclass(frozen=True)
class Character:
    """chi_k(theta) = e^{i k.theta}; every irreducible representation of a torus has d_k = 1."""

    weight: tuple[int, ...]
    dim: int = field(default=1, init=False)

    def __call__(self, theta: Sequence[object]) -> mp.mpc:
        return mp.expj(mp.fsum(k * t for k, t in zip(self.weight, theta)))

    def conj(self, theta: Sequence[object]) -> mp.mpc:
        return mp.conj(self(theta))


def haar_integrate(g: TorusGroup, f: Callable[[list[mp.mpf]], object], nodes: int) -> mp.mpc:
    """(1/N^d) sum over the uniform grid theta = 2 pi k / N.

    Exact for trigonometric polynomials of degree < N in each angle.
    """
    if nodes < 1:
        raise ValueError(f"nodes must be positive, got {nodes}")
    step = 2 * mp.pi / nodes
    total = mp.mpc(0)
    for ks in itertools.product(range(nodes), repeat=g.d):
        total += f([step * k for k in ks])
    return total / mp.mpf(nodes) ** g.d


def laplace_character(g: TorusGroup, k: Sequence[int]) -> mp.mpf:
    """(Delta chibar_k)(e_0) for the flat metric proportional to `gram` with unit total volume.

    -k^T gram^{-1} k (covolume sqrt(det gram))^{2/d}; the standard torus gives -(2 pi)^2 |k|^2.
    """
    if len(k) != g.d:
        raise MismatchedVariables(f"weight {tuple(k)} for a {g.d}-torus")
    if not any(k):
        return mp.mpf(0)
    gram = g.metric
    inv = mp.inverse(gram)
    quad = mp.fsum(k[a] * inv[a, b] * k[b] for a in range(g.d) for b in range(g.d))
    volume = g.fundamental_volume * mp.sqrt(mp.det(gram))
    return -quad * volume ** (mp.mpf(2) / g.d)


def _check_metric_at_zero(metric: JetMatrix) -> tuple[int, int]:
    d = len(metric)
    if any(len(row) != d for row in metric):
        raise MismatchedVariables("metric jet matrix must be square")
    num_vars = metric[0][0].num_vars
    if num_vars != d:
        raise MismatchedVariables(f"{d}x{d} metric in {num_vars} coordinates")
    g0 = mp.matrix([[mp.re(entry.value()) for entry in row] for row in metric])
    tol = tolerance()
    for a in range(d):
        for b in range(d):
            if metric[a][b].distance(metric[b][a]) > tol:
                raise NotPositiveDefinite(f"metric not symmetric at ({a}, {b})")
    spectrum = mp.eigsy(g0, eigvals_only=True)
    lowest = min(spectrum[r] for r in range(d))
    if lowest <= tol:
        raise NotPositiveDefinite(f"metric at 0 has eigenvalue {mp.nstr(lowest, 5)}")
    return d, min(entry.order for row in metric for entry in row)


def christoffel_symbols(metric: JetMatrix) -> list[list[list[Jet]]]:
    """Gamma^a_{jl} = 1/2 g^{ab} (d_j g_{bl} + d_l g_{bj} - d_b g_{jl}), as jets of order N - 1."""
    d, order = _check_metric_at_zero(metric)
    inverse = jet_matrix_inverse(metric)
    dg = [[[jet_diff(metric[b][l], unit_index(d, j)) for j in range(d)] for l in range(d)] for b in range(d)]
    gamma = []
    for a in range(d):
        plane = []
        for j in range(d):
            row = []
            for l in range(d):
                acc = Jet(d, order - 1)
                for b in range(d):
                    lowered = dg[b][l][j] + dg[b][j][l] - dg[j][l][b]
                    acc = acc + jet_mul(inverse[a][b].truncate(order - 1), lowered)
                row.append(acc.scale(mp.mpf(1) / 2))
            plane.append(row)
        gamma.append(plane)
    return gamma


def group_scalar_curvature(metric: JetMatrix) -> mp.mpf:
    """Scalar curvature at 0 of the Riemannian metric g_{jl}(y) given as jets (order >= 2)."""
    d, order = _check_metric_at_zero(metric)
    if order < 2:
        raise ValueError(f"scalar curvature needs a 2-jet of the metric, got order {order}")
    if d == 1:
        return mp.mpf(0)
    gamma = christoffel_symbols(metric)
    g_inv = mp.inverse(mp.matrix([[mp.re(entry.value()) for entry in row] for row in metric]))

    def at0(jet: Jet) -> mp.mpc:
        return jet.value()

    scalar = mp.mpc(0)
    for j in range(d):
        for l in range(d):
            # R_{jl} = d_a Gamma^a_{jl} - d_j Gamma^a_{al} + Gamma^a_{ab} Gamma^b_{jl} - Gamma^a_{jb} Gamma^b_{al}
            ricci = mp.mpc(0)
            for a in range(d):
                ricci += at0(jet_diff(gamma[a][j][l], unit_index(d, a)))
                ricci -= at0(jet_diff(gamma[a][a][l], unit_index(d, j)))
                for b in range(d):
                    ricci += at0(gamma[a][a][b]) * at0(gamma[b][j][l])
                    ricci -= at0(gamma[a][j][b]) * at0(gamma[b][a][l])
            scalar += g_inv[j, l] * ricci
    return mp.re(scalar)


@dataclass(frozen=True)
class HaarChecks:
    V0: mp.mpf
    deltaV0: mp.mpf
    rhs: mp.mpf
    second_derivative_sum: mp.mpf    # sum_{s,j} d^2_{y_s} G_jj(0)


def adapted_haar_checks(metric: JetMatrix, v_eff: object) -> HaarChecks:
    """Haar density V(y) = sqrt(det G(y)) / V_eff in adapted coordinates, G(0) = 2I, dG(0) = 0.

    Returns V(0) = 2^{d/2}/V_eff, Delta V(0) by direct differentiation and the curvature
    form 2^{d/2-2} V_eff^{-1} sum_{s,j} d^2_s G_jj(0); raises if the two disagree.
    """
    d, order = _check_metric_at_zero(metric)
    if order < 2:
        raise ValueError(f"adapted checks need a 2-jet of the metric, got order {order}")
    v_eff = mp.mpf(v_eff)
    tol = tolerance()
    for a in range(d):
        for b in range(d):
            target = 2 if a == b else 0
            if abs(metric[a][b].value() - target) > tol:
                raise NormalizationViolated(f"G_{a}{b}(0) = {mp.nstr(metric[a][b].value(), 5)}, expected {target}")
            for s in range(d):
                if abs(metric[a][b][unit_index(d, s)]) > tol:
                    raise NormalizationViolated(f"d_{s} G_{a}{b}(0) does not vanish")

    density = jet_sqrt(jet_det(metric)).scale(1 / v_eff)
    V0 = mp.re(density.value())
    deltaV0 = mp.re(mp.fsum(density.derivative_at_zero(unit_index(d, s, 2)) for s in range(d)))
    second = mp.re(mp.fsum(metric[j][j].derivative_at_zero(unit_index(d, s, 2))
                           for s in range(d) for j in range(d)))
    rhs = mp.mpf(2) ** (mp.mpf(d) / 2 - 2) / v_eff * second
    log.debug("adapted Haar density: V(0)=%s Delta V(0)=%s curvature form=%s", mp.nstr(V0, 12), mp.nstr(deltaV0, 12), mp.nstr(rhs, 12))
    if abs(deltaV0 - rhs) > tolerance(0.5) * max(1, abs(rhs)):
        raise NormalizationViolated(f"Delta V(0) = {mp.nstr(deltaV0, 10)} but curvature form gives {mp.nstr(rhs, 10)}")
    return HaarChecks(V0=V0, deltaV0=deltaV0, rhs=rhs, second_derivative_sum=second)
