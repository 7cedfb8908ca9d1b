"""Stationary phase expansion of oscillatory integrals int e^{imF(x)} u(x) dx.

For a phase F with Im F >= 0, a nondegenerate critical point at the origin and
Im F(0) = 0, the integral has the asymptotic expansion

    (det(m F''(0) / 2 pi i))^{-1/2} e^{imF(0)} sum_j m^{-j} L_j u,

    L_j u = sum_{nu - mu = j, 2 nu >= 3 mu} i^{-j} 2^{-nu}
            <F''(0)^{-1} D, D>^nu (h^mu u / (nu! mu!))(0),

with D = -i d/dx and h = F - F(0) - <F''(0) x, x>/2. Phase and amplitude are jets
at the critical point, so every L_j is a finite, exact jet computation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp

from equiszego.algebra.jets import Jet, jet_diff, jet_mul, unit_index
from equiszego.config import tolerance
from equiszego.errors import BadImaginaryPart, DegenerateHessian, InsufficientOrder, NonStationary

log = logging.getLogger("equiszego.stationary_phase")


@dataclass(frozen=True, eq=False)
class PhaseData:
    """A validated stationary-phase problem: phase jet plus its critical-point data."""

    F: Jet
    F0: mp.mpc
    grad: list[mp.mpc]
    hess: mp.matrix
    hess_inv: mp.matrix
    h: Jet

    @property
    def num_vars(self) -> int:
        return self.F.num_vars


@dataclass(frozen=True, eq=False)
class SPExpansion:
    """prefactor_const * m^prefactor_power * e^{i m phase0} * sum_j m^{-j} terms[j]."""

    prefactor_power: Fraction
    prefactor_const: mp.mpc
    phase0: mp.mpc
    terms: list[mp.mpc] = field(default_factory=list)

    def evaluate(self, m: object, jmax: int | None = None) -> mp.mpc:
        m = mp.mpf(m)
        upto = len(self.terms) if jmax is None else jmax + 1
        series = mp.fsum(self.terms[j] * m ** (-j) for j in range(upto))
        power = mp.mpf(self.prefactor_power.numerator) / self.prefactor_power.denominator
        return self.prefactor_const * m ** power * mp.expj(m * self.phase0) * series


def build_phase(F: Jet, tol: object | None = None) -> PhaseData:
    """Extract F(0), grad, Hessian and remainder h; validate the stationary-phase hypotheses."""
    if F.order < 2:
        raise InsufficientOrder(f"phase jet needs order >= 2, got {F.order}")
    tol = tolerance() if tol is None else mp.mpf(tol)
    N = F.num_vars
    F0 = F.value()
    grad = [F[unit_index(N, a)] for a in range(N)]
    if max(abs(g) for g in grad) > tol:
        raise NonStationary(f"|grad F(0)| = {mp.nstr(max(abs(g) for g in grad), 5)} exceeds {mp.nstr(tol, 3)}")
    hess = mp.matrix(N, N)
    for a in range(N):
        for b in range(N):
            alpha = tuple(sum(x) for x in zip(unit_index(N, a), unit_index(N, b)))
            hess[a, b] = F.derivative_at_zero(alpha)
    if abs(mp.im(F0)) > tol:
        raise BadImaginaryPart(f"Im F(0) = {mp.nstr(mp.im(F0), 5)}; the critical value must be real")
    im_hess = mp.matrix([[mp.im(hess[a, b]) for b in range(N)] for a in range(N)])
    spectrum = mp.eigsy(im_hess, eigvals_only=True)
    lowest = min(spectrum[r] for r in range(N))
    if lowest < -tol:
        raise BadImaginaryPart(f"Im F''(0) has eigenvalue {mp.nstr(lowest, 5)} < 0")
    if abs(mp.det(hess)) <= tol:
        raise DegenerateHessian(f"|det F''(0)| = {mp.nstr(abs(mp.det(hess)), 5)}")
    return PhaseData(F=F, F0=F0, grad=grad, hess=hess, hess_inv=mp.inverse(hess), h=F.drop_below(3))


def prefactor_constant(p: PhaseData) -> mp.mpc:
    """(det(F''(0)/(2 pi i)))^{-1/2}, principal roots of the eigenvalues of (A - iB)/2pi, F'' = i(A - iB)."""
    M = p.hess / (2 * mp.pi * mp.j)
    eigenvalues = mp.eig(M, left=False, right=False)
    if isinstance(eigenvalues, tuple):  # mpmath returns (E, EL, ER) for 1x1 input regardless of flags
        eigenvalues = eigenvalues[0]
    root = mp.mpc(1)
    for r in range(p.num_vars):
        root *= mp.sqrt(eigenvalues[r])
    return 1 / root


def _product_through(h: Jet, mu: int, u: Jet, degree: int) -> Jet:
    """h^mu u, exact through `degree`."""
    if mu and not list(h.items()) and h.order >= degree:
        return Jet(u.num_vars, degree)
    out = u
    for k in range(1, mu + 1):
        # remaining factors of h add at least 3 to the degree
        wanted = degree - 3 * (mu - k)
        exact = min(out.order + h.valuation(), h.order + out.valuation())
        out = jet_mul(out, h, order=min(wanted, exact))
    if out.order < degree:
        raise InsufficientOrder(f"h^{mu} u known through degree {out.order}, need {degree}")
    return out.truncate(degree)


def _operator_power_at_zero(hess_inv: mp.matrix, g: Jet, nu: int) -> mp.mpc:
    """<F''(0)^{-1} D, D>^nu g at 0, with <F''^{-1}D,D> = -sum_ab (F''^{-1})_ab d_a d_b."""
    N = g.num_vars
    out = g.homogeneous_part(2 * nu).truncate(2 * nu)
    for _ in range(nu):
        nxt = Jet(N, out.order - 2)
        for a in range(N):
            for b in range(N):
                coeff = hess_inv[a, b]
                if coeff == 0:
                    continue
                alpha = tuple(x + y for x, y in zip(unit_index(N, a), unit_index(N, b)))
                nxt = nxt + jet_diff(out, alpha).scale(-coeff)
        out = nxt
    return out.value()


def lj_apply(p: PhaseData, u: Jet, j: int, skip_cubic: bool = False) -> mp.mpc:
    """L_j u. With `skip_cubic` the sum runs over 2 nu >= 4 mu, valid only when h has no cubic part."""
    if j < 0:
        raise ValueError(f"j must be nonnegative, got {j}")
    if skip_cubic and list(p.h.homogeneous_part(3).items()):
        raise ValueError("2nu >= 4mu enumeration needs a vanishing cubic part of h")
    total = mp.mpc(0)
    for mu in range(0, 2 * j + 1):
        nu = j + mu
        if 2 * nu < 3 * mu or (skip_cubic and 2 * nu < 4 * mu):
            continue
        g = _product_through(p.h, mu, u, 2 * nu)
        value = _operator_power_at_zero(p.hess_inv, g, nu)
        total += value / (mp.factorial(nu) * mp.factorial(mu) * mp.mpf(2) ** nu)
    return total * mp.power(mp.j, -j)


def sp_expand(p: PhaseData, u: Jet, jmax: int) -> SPExpansion:
    terms = [lj_apply(p, u, j) for j in range(jmax + 1)]
    expansion = SPExpansion(
        prefactor_power=Fraction(-p.num_vars, 2),
        prefactor_const=prefactor_constant(p),
        phase0=p.F0,
        terms=terms,
    )
    log.debug("expanded %d-variable phase through j=%d", p.num_vars, jmax)
    return expansion
