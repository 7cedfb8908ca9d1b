"""Pseudohermitian invariants at a point, computed from a BRT potential jet.

In BRT coordinates x = (z, theta) the CR structure is spanned by
Z_j = d/dz_j + i (dphi/dz_j) d/dtheta, so every local invariant at the origin is a
Wirtinger derivative of the potential phi. Potentials are real jets in 2n real
variables, z_j = x_{2j} + i x_{2j+1}; internally they are rewritten in the
independent variables (z_0..z_{n-1}, zbar_0..zbar_{n-1}), where Wirtinger
derivatives become ordinary partial derivatives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from mpmath import mp

from equiszego.algebra.jets import Jet, jet_det, jet_diff, jet_log, unit_index
from equiszego.config import tolerance
from equiszego.errors import (
    InsufficientOrder,
    MismatchedVariables,
    NonOrthonormalDirections,
    NormalizationViolated,
    NotPositiveDefinite,
)

log = logging.getLogger("equiszego.pseudohermitian")

Vector = Sequence[object]


# --- (x, y) <-> (z, zbar) ---

def to_wirtinger(phi: Jet, n: int) -> Jet:
    """Rewrite a jet in x_{2j}, x_{2j+1} as a polynomial in z_j, zbar_j (variables z first)."""
    N = 2 * n
    if phi.num_vars != N:
        raise MismatchedVariables(f"potential in {phi.num_vars} real variables for n={n}")
    half = mp.mpf(1) / 2
    subs = []
    for j in range(n):
        subs.append(Jet(N, phi.order, {unit_index(N, j): half, unit_index(N, n + j): half}))
        subs.append(Jet(N, phi.order, {unit_index(N, j): -half * 1j, unit_index(N, n + j): half * 1j}))
    return phi.substitute(subs)


def from_wirtinger(psi: Jet, n: int) -> Jet:
    N = 2 * n
    subs = [None] * N
    for j in range(n):
        subs[j] = Jet(N, psi.order, {unit_index(N, 2 * j): 1, unit_index(N, 2 * j + 1): 1j})
        subs[n + j] = Jet(N, psi.order, {unit_index(N, 2 * j): 1, unit_index(N, 2 * j + 1): -1j})
    return psi.substitute(subs)


def _bidegree(alpha: tuple[int, ...], n: int) -> tuple[int, int]:
    return sum(alpha[:n]), sum(alpha[n:])


def _holo_anti(n: int, holo: Sequence[int], anti: Sequence[int]) -> tuple[int, ...]:
    alpha = [0] * (2 * n)
    for j in holo:
        alpha[j] += 1
    for j in anti:
        alpha[n + j] += 1
    return tuple(alpha)


def drop_pure(psi: Jet, n: int) -> Jet:
    """Remove every z^alpha and zbar^alpha term (pluriharmonic part, constant included)."""
    return Jet(psi.num_vars, psi.order,
               {a: c for a, c in psi.items() if 0 not in _bidegree(a, n)})


def _embed(f: Jet, n: int, conjugate: bool) -> Jet:
    """A holomorphic jet in n variables as a jet in (z, zbar), or its conjugate in zbar."""
    pad = (0,) * n
    if conjugate:
        return Jet(2 * n, f.order, {pad + a: mp.conj(c) for a, c in f.items()})
    return Jet(2 * n, f.order, {a + pad: c for a, c in f.items()})


def _holomorphic_change(psi: Jet, n: int, change: Sequence[Jet]) -> Jet:
    """psi(f(v), conj f(vbar)) for a holomorphic map z = f(v), f(0) = 0."""
    subs = [_embed(f, n, False) for f in change] + [_embed(f, n, True) for f in change]
    return psi.substitute(subs)


# --- value types ---

@dataclass(frozen=True, eq=False)
class PotentialJet:
    """Real BRT potential phi(z) at the origin, in 2n real variables.

    phi(0) = 0, dphi(0) = 0 and the Levi matrix is positive definite; `order` is at
    least 4 (the curvature invariants read fourth derivatives).
    """

    n: int
    phi: Jet

    def __post_init__(self) -> None:
        if self.phi.num_vars != 2 * self.n:
            raise MismatchedVariables(f"potential in {self.phi.num_vars} real variables for n={self.n}")
        if self.phi.order < 4:
            raise InsufficientOrder(f"potential jet order {self.phi.order} < 4")
        tol = tolerance()
        if self.phi.imag_part().max_abs() > tol:
            raise ValueError("potential must be real-valued")
        low = self.phi.truncate(1).max_abs()
        if low > tol:
            raise ValueError(f"potential must vanish to second order at 0 (|phi(0)|+|dphi(0)| ~ {mp.nstr(low, 5)})")
        levi_form(self)

    def wirtinger(self) -> Jet:
        return to_wirtinger(self.phi, self.n)


@dataclass(frozen=True, eq=False)
class NormalizedPotential:
    """phi_norm = |z|^2 + O(|z|^4) with no (4,0) or (3,1) part; z_old = coord_change(z_new)."""

    phi_norm: PotentialJet
    coord_change: list[Jet]

    @property
    def n(self) -> int:
        return self.phi_norm.n

    def linear_part(self) -> mp.matrix:
        n = self.n
        return mp.matrix([[f[unit_index(n, k)] for k in range(n)] for f in self.coord_change])


# --- operations ---

def _levi_matrix(psi: Jet, n: int) -> mp.matrix:
    return mp.matrix([[psi[_holo_anti(n, [j], [l])] for l in range(n)] for j in range(n)])


def levi_form(p: PotentialJet) -> mp.matrix:
    """(d^2 phi / dz_j dzbar_l)(0), checked Hermitian positive definite."""
    H = _levi_matrix(to_wirtinger(p.phi, p.n), p.n)
    tol = tolerance()
    for j in range(p.n):
        for l in range(p.n):
            if abs(H[j, l] - mp.conj(H[l, j])) > tol:
                raise NotPositiveDefinite(f"Levi matrix not Hermitian at ({j}, {l})")
    spectrum = mp.eighe(H, eigvals_only=True)
    lowest = min(mp.re(spectrum[r]) for r in range(p.n))
    if lowest <= tol:
        raise NotPositiveDefinite(f"Levi matrix has eigenvalue {mp.nstr(lowest, 5)}")
    return H


def _vanishing_holo(n: int, order: int, coeffs: dict) -> list[Jet]:
    return [Jet(n, order, coeffs.get(j, {})) for j in range(n)]


def normalize_potential(p: PotentialJet) -> NormalizedPotential:
    """Holomorphic change of coordinates bringing phi to |z|^2 + (2,2) + O(|z|^5).

    Steps: drop the pluriharmonic part; z = B w with B^T H conj(B) = I from the
    Cholesky factor of the Levi matrix H; w = v + q(v) with q quadratic killing the
    (2,1)/(1,2) part; v = u + r(u) with r cubic killing the (3,1)/(1,3) part.
    """
    n = p.n
    order = p.phi.order
    psi = drop_pure(p.wirtinger(), n)
    identity = [Jet.variable(n, order, j) for j in range(n)]

    H = _levi_matrix(psi, n)
    L = mp.cholesky(H)
    C = mp.inverse(L.H)
    B = mp.matrix([[mp.conj(C[j, k]) for k in range(n)] for j in range(n)])
    change = [Jet(n, order, {unit_index(n, k): B[j, k] for k in range(n)}) for j in range(n)]
    psi = drop_pure(_holomorphic_change(psi, n, change), n)

    for degree in (2, 3):
        corrections: dict[int, dict] = {}
        for alpha, c in psi.items():
            holo, anti = _bidegree(alpha, n)
            if holo == degree and anti == 1:
                j = alpha[n:].index(1)
                corrections.setdefault(j, {})[alpha[:n]] = -c
        if not corrections:
            continue
        q = _vanishing_holo(n, order, corrections)
        step = [identity[j] + q[j] for j in range(n)]
        psi = drop_pure(_holomorphic_change(psi, n, step), n)
        change = [f.substitute(step) for f in change]

    _check_normalized(psi, n)
    phi_norm = PotentialJet(n, from_wirtinger(psi, n).real_part())
    log.debug("normalized %d-dimensional potential to order %d", n, order)
    return NormalizedPotential(phi_norm=phi_norm, coord_change=change)


def _check_normalized(psi: Jet, n: int) -> None:
    tol = tolerance(0.5)
    for alpha, c in psi.items():
        holo, anti = _bidegree(alpha, n)
        degree = holo + anti
        if abs(c) <= tol:
            continue
        if degree == 2 and (alpha[:n] != alpha[n:] or abs(c - 1) > tol):
            raise NormalizationViolated(f"quadratic term {alpha} = {mp.nstr(c, 5)} is not |z|^2")
        if degree in (3, 4) and min(holo, anti) <= 1:
            raise NormalizationViolated(f"term {alpha} of type ({holo},{anti}) survived normalization")


def rigid_scalar_curvature(p: PotentialJet) -> mp.mpf:
    """S_L(0) = -2 tr(H(0)^{-1} M), M_jl = d_j dbar_l log det H(z) at 0, H(z) = (d_j dbar_l phi)."""
    if p.phi.order < 4:
        raise InsufficientOrder(f"rigid scalar curvature needs a 4-jet, got order {p.phi.order}")
    n = p.n
    psi = p.wirtinger()
    H = [[jet_diff(psi, _holo_anti(n, [j], [l])) for l in range(n)] for j in range(n)]
    log_density = jet_log(jet_det(H))
    H0 = mp.inverse(mp.matrix([[H[j][l].value() for l in range(n)] for j in range(n)]))
    trace = mp.mpc(0)
    for j in range(n):
        for l in range(n):
            trace += H0[l, j] * log_density.derivative_at_zero(_holo_anti(n, [j], [l]))
    return mp.re(-2 * trace)


def tw_scalar_curvature(p: PotentialJet) -> mp.mpf:
    """Tanaka-Webster scalar curvature R = S_L / 4."""
    return rigid_scalar_curvature(p) / 4


def chern_curvature_entry(np_: NormalizedPotential, s: int, t: int, j: int, l: int) -> mp.mpc:
    """<R(ebar_s, e_t) e_j | e_l> = d^4 phi / dzbar_s dz_t dzbar_l dz_j at 0."""
    n = np_.n
    for index in (s, t, j, l):
        if not 0 <= index < n:
            raise IndexError(f"curvature index {index} out of range for n={n}")
    psi = np_.phi_norm.wirtinger()
    return psi.derivative_at_zero(_holo_anti(n, [t, j], [s, l]))


def orthonormal_directions(np_: NormalizedPotential, vectors: Sequence[Vector]) -> list[list[mp.mpc]]:
    """Express (1,0)-vectors given in the original chart in the normalized coordinates and
    Gram-Schmidt them in the Levi metric."""
    n = np_.n
    A = np_.linear_part()
    H = levi_form(np_.phi_norm)

    def inner(e, f):
        return mp.fsum(e[a] * H[a, b] * mp.conj(f[b]) for a in range(n) for b in range(n))

    basis: list[list[mp.mpc]] = []
    for c in vectors:
        e = mp.lu_solve(A, mp.matrix([mp.mpc(x) for x in c]))
        e = [e[a] for a in range(n)]
        for f in basis:
            overlap = inner(e, f)
            e = [e[a] - overlap * f[a] for a in range(n)]
        norm = mp.sqrt(mp.re(inner(e, e)))
        if norm <= tolerance(0.5):
            raise NonOrthonormalDirections("orbit directions are linearly dependent")
        basis.append([x / norm for x in e])
    return basis


def scalar_in_G_direction(np_: NormalizedPotential, dirs: Sequence[Vector]) -> mp.mpf:
    """R_e = sum_{j,l} <R(ebar_j, e_l) e_j | e_l> over Levi-orthonormal (1,0) directions."""
    n = np_.n
    H = levi_form(np_.phi_norm)
    tol = tolerance(0.5)
    for j, e in enumerate(dirs):
        if len(e) != n:
            raise MismatchedVariables(f"direction {j} has {len(e)} components for n={n}")
        for l, f in enumerate(dirs):
            g = mp.fsum(e[a] * H[a, b] * mp.conj(f[b]) for a in range(n) for b in range(n))
            if abs(g - (1 if j == l else 0)) > tol:
                raise NonOrthonormalDirections(f"<e_{j}|e_{l}> = {mp.nstr(g, 5)}")

    # P^{da} = sum_j e_j^d conj(e_j^a); R_e = sum T_{a b c d} P^{da} P^{bc}
    P = [[mp.fsum(e[d] * mp.conj(e[a]) for e in dirs) for a in range(n)] for d in range(n)]
    psi = np_.phi_norm.wirtinger()
    total = mp.mpc(0)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    weight = P[d][a] * P[b][c]
                    if weight == 0:
                        continue
                    total += psi.derivative_at_zero(_holo_anti(n, [b, d], [a, c])) * weight
    return mp.re(total)
