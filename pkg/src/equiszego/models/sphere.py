"""Model CR manifold: the unit sphere S^{2n+1} in C^{n+1} with the Hopf circle action
and a torus G = T^d acting diagonally with integer weights W (d x (n+1)).

The sphere is homogeneous, so the Hardy space of degree-m CR functions is spanned by
the monomials z^alpha, |alpha| = m, and every Szego kernel below is a finite sum.
Under g = e^{i theta} the monomial z^alpha has G-weight W alpha; the isotypic piece for
the character chi_k keeps the slice {|alpha| = m, W alpha = k}.

Conventions: omega_0 = -Im(<dz, z>) so that <omega_0, T> = -1 for the Hopf generator
T = iz; the moment map is mu_j(z) = sum_l W_jl |z_l|^2.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from mpmath import mp

from equiszego.algebra.jets import Jet, homogeneous_indices, jet_exp, jet_log, unit_index
from equiszego.asymptotics.stationary_phase import build_phase, sp_expand
from equiszego.config import tolerance
from equiszego.errors import ChartSingular, Infeasible, InvalidModel, MismatchedVariables, NonFreeOrbit
from equiszego.geometry.group import TorusGroup, haar_integrate
from equiszego.geometry.pseudohermitian import PotentialJet

log = logging.getLogger("equiszego.sphere")

Weights = tuple[tuple[int, ...], ...]


# --- ambient Hermitian geometry of C^{n+1} ---

def _hermitian(u: Sequence[object], v: Sequence[object]) -> mp.mpc:
    """<u, v> = sum u_l conj(v_l)."""
    return mp.fsum(mp.mpc(a) * mp.conj(b) for a, b in zip(u, v))


def contact_form(z: Sequence[object], u: Sequence[object]) -> mp.mpf:
    """omega_0(u) at z; omega_0(iz) = -1."""
    return -mp.im(_hermitian(u, z))


def levi_metric(z: Sequence[object], u: Sequence[object], v: Sequence[object]) -> mp.mpf:
    """Levi metric -1/2 d omega_0(u_H, J v_H) on the contact plane plus omega_0 (x) omega_0."""
    def horizontal(w):
        # remove the components along z and iz
        c = _hermitian(w, z)
        return [mp.mpc(a) - c * b for a, b in zip(w, z)]

    uh, vh = horizontal(u), horizontal(v)
    # d omega_0(a, b) = -2 Im <b, a>, here with b = J v_H = i v_H
    d_omega = -2 * mp.im(_hermitian([1j * b for b in vh], uh))
    return -d_omega / 2 + contact_form(z, u) * contact_form(z, v)


def _levi_volume_const(n: int) -> mp.mpf:
    """sqrt(det) of the Levi metric on a frame that is orthonormal for the round metric."""
    dim = n + 1
    z = [mp.mpc(1)] + [mp.mpc(0)] * n
    frame = [[1j if l == 0 else 0 for l in range(dim)]]
    for l in range(1, dim):
        frame.append([1 if m == l else 0 for m in range(dim)])
        frame.append([1j if m == l else 0 for m in range(dim)])
    gram = mp.matrix([[levi_metric(z, u, v) for v in frame] for u in frame])
    return mp.sqrt(mp.det(gram))


# --- value types ---

@dataclass(frozen=True)
class SpherePoint:
    z: tuple[mp.mpc, ...]

    def __post_init__(self) -> None:
        norm = mp.fsum(abs(c) ** 2 for c in self.z)
        if abs(norm - 1) > tolerance():
            raise InvalidModel(f"point is not on the unit sphere: |z|^2 = {mp.nstr(norm, 20)}")

    @classmethod
    def from_coordinates(cls, coords: Sequence[object]) -> SpherePoint:
        return cls(tuple(mp.mpc(c) for c in coords))

    @classmethod
    def from_moduli(cls, squares: Sequence[object]) -> SpherePoint:
        """The point with z_l = sqrt(x_l) >= 0."""
        values = [mp.mpf(x) for x in squares]
        if any(x < 0 for x in values):
            raise InvalidModel(f"squared moduli must be nonnegative, got {[mp.nstr(x, 8) for x in values]}")
        return cls(tuple(mp.mpc(mp.sqrt(x)) for x in values))

    @property
    def moduli_squared(self) -> list[mp.mpf]:
        return [abs(c) ** 2 for c in self.z]


@dataclass(frozen=True)
class SphereModel:
    n: int
    W: Weights
    levi_volume_const: mp.mpf = field(init=False, repr=False)

    def __post_init__(self) -> None:
        W = tuple(tuple(int(w) for w in row) for row in self.W)
        object.__setattr__(self, "W", W)
        if self.n < 1:
            raise InvalidModel(f"CR dimension must be positive, got {self.n}")
        if not W or any(len(row) != self.n + 1 for row in W):
            raise MismatchedVariables(f"weight matrix must be d x {self.n + 1}")
        if self.d > self.n:
            raise InvalidModel(f"torus of dimension {self.d} cannot act freely on S^{2 * self.n + 1}")
        if _integer_rank(W) != self.d:
            raise InvalidModel(f"weight matrix {W} does not have full rank {self.d}")
        object.__setattr__(self, "levi_volume_const", _levi_volume_const(self.n))

    @classmethod
    def from_config(cls, n: int, weights: Sequence[Sequence[int]] | Sequence[int]) -> SphereModel:
        rows = weights if weights and isinstance(weights[0], (list, tuple)) else [weights]
        return cls(n=int(n), W=tuple(tuple(int(w) for w in row) for row in rows))

    @property
    def d(self) -> int:
        return len(self.W)

    @property
    def exponent_base(self) -> Fraction:
        """Leading power n - d/2 of m in S_{k,m}(x, x)."""
        return Fraction(2 * self.n - self.d, 2)

    def torus(self, p: SpherePoint | None = None) -> TorusGroup:
        if p is None:
            return TorusGroup(self.d)
        covolume = (2 * mp.pi) ** self.d / stabilizer_order(self, p)
        return TorusGroup(self.d, gram=orbit_gram(self, p), covolume=covolume)

    def act(self, theta: Sequence[object], p: SpherePoint) -> list[mp.mpc]:
        """g o p for g = e^{i theta}."""
        return [mp.expj(mp.fsum(self.W[j][l] * theta[j] for j in range(self.d))) * p.z[l]
                for l in range(self.n + 1)]


# --- integer linear algebra on weights ---

def _integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    size = len(a)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, size):
            factor = a[r][col] / a[col][col]
            a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return int(det)


def _integer_rank(rows: Sequence[Sequence[int]]) -> int:
    cols = len(rows[0])
    for size in range(min(len(rows), cols), 0, -1):
        for rsel in itertools.combinations(range(len(rows)), size):
            for csel in itertools.combinations(range(cols), size):
                if _integer_det([[rows[r][c] for c in csel] for r in rsel]):
                    return size
    return 0


def _rational_solve(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction] | None:
    size = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(size):
            if r != col and a[r][col] != 0:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][size] / a[r][r] for r in range(size)]


# --- moment map and zero locus ---

def moment_map(model: SphereModel, p: SpherePoint) -> list[mp.mpf]:
    x = p.moduli_squared
    return [mp.fsum(w * xl for w, xl in zip(row, x)) for row in model.W]


def find_zero_point(model: SphereModel, max_iter: int = 200) -> SpherePoint:
    """Max-entropy point of mu^{-1}(0): |z_l|^2 proportional to exp(-(W^T nu)_l).

    Newton's method on the convex dual f(nu) = log sum_l exp(-(W^T nu)_l), whose
    gradient is -W x; a zero of the moment map is a critical point of f.
    """
    W, d, size = model.W, model.d, model.n + 1
    for j, row in enumerate(W):
        if not (any(w > 0 for w in row) and any(w < 0 for w in row)):
            raise Infeasible(f"weight row {j} = {row} has no sign change; mu_{j} cannot vanish")

    def probabilities(nu):
        logits = [-mp.fsum(W[j][l] * nu[j] for j in range(d)) for l in range(size)]
        top = max(logits)
        weights = [mp.exp(v - top) for v in logits]
        total = mp.fsum(weights)
        return [w / total for w in weights], top + mp.log(total)

    nu = [mp.mpf(0)] * d
    tol = tolerance()
    for iteration in range(max_iter):
        x, value = probabilities(nu)
        grad = [-mp.fsum(W[j][l] * x[l] for l in range(size)) for j in range(d)]
        if max(abs(g) for g in grad) <= tol:
            point = SpherePoint.from_moduli(x)
            log.info("zero point for W=%s after %d Newton steps: |z|^2=%s",
                     W, iteration, [mp.nstr(v, 12) for v in x])
            return point
        hess = mp.matrix(d, d)
        for a in range(d):
            for b in range(d):
                cov = mp.fsum(W[a][l] * W[b][l] * x[l] for l in range(size))
                hess[a, b] = cov - grad[a] * grad[b]
        try:
            step = mp.lu_solve(hess, mp.matrix([-g for g in grad]))
        except ZeroDivisionError as e:
            raise Infeasible(f"moment map Hessian is singular: {e}") from e
        t = mp.mpf(1)
        while True:
            trial = [nu[j] + t * step[j] for j in range(d)]
            if probabilities(trial)[1] <= value or t < mp.mpf(2) ** -40:
                break
            t /= 2
        nu = trial
    raise Infeasible(f"no interior zero of the moment map for W={W} after {max_iter} Newton steps")


def stabilizer_order(model: SphereModel, p: SpherePoint) -> int:
    """|Gamma| for Gamma = {g in G : g o p in S^1 p}.

    The gcd of the maximal minors of [W; 1 ... 1] on the columns where p is nonzero.
    """
    support = [l for l, c in enumerate(p.z) if abs(c) > tolerance()]
    rows = [list(row) for row in model.W] + [[1] * (model.n + 1)]
    restricted = [[row[l] for l in support] for row in rows]
    size = model.d + 1
    if len(support) < size:
        raise NonFreeOrbit(f"G x S^1 has a continuous stabilizer at p (support {support})")
    minors = [abs(_integer_det([[row[c] for c in cols] for row in restricted]))
              for cols in itertools.combinations(range(len(support)), size)]
    order = math.gcd(*minors)
    if order == 0:
        raise NonFreeOrbit("G x S^1 has a continuous stabilizer at p")
    if order > 1:
        log.info("finite stabilizer of order %d at p for W=%s", order, model.W)
    return order


# --- Hardy space and exact kernels ---

@lru_cache(maxsize=4096)
def _factorial(k: int, prec: int) -> mp.mpf:
    return mp.factorial(k)


def hardy_norm(model: SphereModel, alpha: Sequence[int]) -> mp.mpf:
    """||z^alpha||^2 = levi_volume_const * 2 pi^{n+1} alpha! / (n + |alpha|)!."""
    if len(alpha) != model.n + 1:
        raise MismatchedVariables(f"multi-index {tuple(alpha)} for C^{model.n + 1}")
    prec = mp.prec
    num = math.prod(_factorial(a, prec) for a in alpha) if alpha else 1
    return model.levi_volume_const * 2 * mp.pi ** (model.n + 1) * num / _factorial(model.n + sum(alpha), prec)


def _monomial_term(model: SphereModel, alpha: Sequence[int], x: Sequence[mp.mpf]) -> mp.mpf:
    value = mp.mpf(1)
    for xl, a in zip(x, alpha):
        if a:
            value *= xl ** a
    return value / hardy_norm(model, alpha)


def szego_m_diag(model: SphereModel, mm: int, p: SpherePoint) -> mp.mpf:
    """S_m(p, p) = sum_{|alpha| = m} |p^alpha|^2 / ||z^alpha||^2."""
    if mm < 0:
        raise ValueError(f"degree must be nonnegative, got {mm}")
    x = p.moduli_squared
    return mp.fsum(_monomial_term(model, alpha, x) for alpha in homogeneous_indices(model.n + 1, mm))


def _pivot_columns(model: SphereModel) -> tuple[int, ...] | None:
    rows = [list(row) for row in model.W] + [[1] * (model.n + 1)]
    for cols in itertools.combinations(range(model.n + 1), model.d + 1):
        if _integer_det([[row[c] for c in cols] for row in rows]):
            return cols
    return None


def slice_indices(model: SphereModel, k: Sequence[int], mm: int) -> Iterator[tuple[int, ...]]:
    """Multi-indices with |alpha| = mm and W alpha = k.

    The d + 1 linear constraints are solved exactly for a pivot set of coordinates;
    the remaining n - d coordinates are enumerated.
    """
    if len(k) != model.d:
        raise MismatchedVariables(f"weight {tuple(k)} for a {model.d}-torus")
    size = model.n + 1
    pivots = _pivot_columns(model)
    if pivots is None:
        for alpha in homogeneous_indices(size, mm):
            if all(sum(w * a for w, a in zip(row, alpha)) == kj for row, kj in zip(model.W, k)):
                yield alpha
        return
    free = [l for l in range(size) if l not in pivots]
    rows = [list(row) for row in model.W] + [[1] * size]
    target = list(k) + [mm]
    block = [[row[c] for c in pivots] for row in rows]
    for values in _bounded(len(free), mm):
        rhs = [t - sum(row[l] * v for l, v in zip(free, values)) for row, t in zip(rows, target)]
        solution = _rational_solve(block, rhs)
        if solution is None or any(s.denominator != 1 or s < 0 for s in solution):
            continue
        alpha = [0] * size
        for l, v in zip(free, values):
            alpha[l] = v
        for l, s in zip(pivots, solution):
            alpha[l] = int(s)
        yield tuple(alpha)


def _bounded(count: int, total: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer tuples of length `count` with sum <= total."""
    if count == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _bounded(count - 1, total - first):
            yield (first,) + rest


def szego_km_diag(model: SphereModel, k: Sequence[int], mm: int, p: SpherePoint) -> mp.mpf:
    """S_{k,m}(p, p): the slice sum; zero when the slice is empty."""
    x = p.moduli_squared
    return mp.fsum(_monomial_term(model, alpha, x) for alpha in slice_indices(model, k, mm))


def slice_nonempty(model: SphereModel, k: Sequence[int], mm: int) -> bool:
    return next(slice_indices(model, k, mm), None) is not None


def szego_m_kernel(model: SphereModel, mm: int, z: Sequence[object], w: Sequence[object]) -> mp.mpc:
    """S_m(z, w) = (n+m)! / (m! 2 pi^{n+1} c) <z, w>^m, the closed form of the monomial sum."""
    prec = mp.prec
    const = _factorial(model.n + mm, prec) / (
        _factorial(mm, prec) * 2 * mp.pi ** (model.n + 1) * model.levi_volume_const)
    return const * _hermitian(z, w) ** mm


def group_integral_km(model: SphereModel, k: Sequence[int], mm: int, p: SpherePoint,
                      nodes: int | None = None) -> mp.mpc:
    """d_k int_G S_m(g o p, p) chibar_k(g) dmu(g) on a uniform grid.

    The integrand is a trigonometric polynomial of degree <= m max|W| + |k| in each
    angle, so any grid finer than that is exact.
    """
    if nodes is None:
        top = max(abs(w) for row in model.W for w in row)
        nodes = mm * top + max(abs(kj) for kj in k) + 1
    group = model.torus()

    def integrand(theta):
        chibar = mp.expj(-mp.fsum(kj * t for kj, t in zip(k, theta)))
        return szego_m_kernel(model, mm, model.act(theta, p), p.z) * chibar

    return haar_integrate(group, integrand, nodes)


def _kernel_row(args: tuple[SphereModel, tuple[int, ...], int, SpherePoint, int]) -> tuple[int, mp.mpf]:
    model, k, mm, p, prec = args
    with mp.workprec(prec):
        return mm, szego_km_diag(model, k, mm, p)


def _init_worker(prec: int) -> None:
    mp.prec = prec


def kernel_table(model: SphereModel, k: Sequence[int], m_values: Sequence[int], p: SpherePoint,
                 workers: int = 1) -> list[tuple[int, mp.mpf]]:
    """(m, S_{k,m}(p, p)) for every m in `m_values` with a nonempty slice, ordered by m."""
    k = tuple(int(v) for v in k)
    degrees = sorted(m for m in set(m_values) if slice_nonempty(model, k, m))
    skipped = len(set(m_values)) - len(degrees)
    if skipped:
        log.info("skipping %d degrees with empty weight-%s slices", skipped, k)
    jobs = [(model, k, m, p, mp.prec) for m in degrees]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(mp.prec,)) as pool:
            rows = list(pool.map(_kernel_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_kernel_row(job) for job in jobs]
    return sorted(rows)


# --- orbit geometry ---

def orbit_vectors(model: SphereModel, p: SpherePoint) -> list[list[mp.mpc]]:
    """Infinitesimal generators xi_j = (i W_jl p_l)_l of the G-action at p."""
    return [[1j * row[l] * p.z[l] for l in range(model.n + 1)] for row in model.W]


def orbit_gram(model: SphereModel, p: SpherePoint) -> mp.matrix:
    """Levi-metric Gram matrix <xi_j | xi_l> of the orbit directions at p."""
    xi = orbit_vectors(model, p)
    return mp.matrix([[levi_metric(p.z, u, v) for v in xi] for u in xi])


def orbit_volume(model: SphereModel, p: SpherePoint) -> mp.mpf:
    """V_eff = (2 pi)^d sqrt(det Gram) / |Gamma| (the Gram matrix is constant along torus orbits)."""
    order = stabilizer_order(model, p)
    return (2 * mp.pi) ** model.d * mp.sqrt(mp.det(orbit_gram(model, p))) / order


def _chart_index(p: SpherePoint) -> int:
    moduli = [abs(c) for c in p.z]
    c = max(range(len(moduli)), key=lambda l: moduli[l])
    if moduli[c] <= tolerance():
        raise ChartSingular("no affine chart contains the point")
    return c


def brt_potential(model: SphereModel, p: SpherePoint, order: int = 6) -> PotentialJet:
    """BRT potential at p in the affine chart w_l = z_l / z_c, c = argmax |p_l|.

    phi(w) = 1/2 log(1 + |w|^2), recentred at w_0 = p / p_c with the pluriharmonic
    constant and linear parts removed.
    """
    n = model.n
    c = _chart_index(p)
    w0 = [p.z[l] / p.z[c] for l in range(n + 1) if l != c]
    N = 2 * n
    inner = Jet.constant(N, order, 1 + mp.fsum(abs(a) ** 2 for a in w0))
    for j in range(n):
        v = Jet.complex_variable(n, order, j)
        vbar = Jet.complex_variable(n, order, j, conjugate=True)
        inner = inner + v.scale(mp.conj(w0[j])) + vbar.scale(w0[j]) + v * vbar
    phi = jet_log(inner).scale(mp.mpf(1) / 2).drop_below(2).real_part()
    return PotentialJet(n, phi)


def orbit_directions(model: SphereModel, p: SpherePoint) -> list[list[mp.mpc]]:
    """(1,0)-components dw_a(xi_j) of the orbit generators in the chart of `brt_potential`."""
    c = _chart_index(p)
    out = []
    for xi in orbit_vectors(model, p):
        out.append([(xi[l] - p.z[l] / p.z[c] * xi[c]) / p.z[c] for l in range(model.n + 1) if l != c])
    return out


@dataclass(frozen=True, eq=False)
class OrbitPhase:
    """S_{k,m}(p, p) = multiplicity * amplitude(m) * int e^{imF(theta)} u(theta) dtheta near theta = 0."""

    F: Jet
    u: Jet
    multiplicity: int
    n: int

    def amplitude(self, m: object) -> mp.mpf:
        """prod_{i=1..n} (m + i) = (n + m)! / m!."""
        m = mp.mpf(m)
        return mp.fprod(m + i for i in range(1, self.n + 1))


def _angle_phase(model: SphereModel, p: SpherePoint, order: int) -> Jet:
    d = model.d
    x = p.moduli_squared
    total = Jet(d, order)
    for l in range(model.n + 1):
        if x[l] == 0:
            continue
        arg = Jet(d, order, {unit_index(d, j): 1j * model.W[j][l] for j in range(d)})
        total = total + jet_exp(arg).scale(x[l])
    return jet_log(total).scale(-1j)


def orbit_phase(model: SphereModel, k: Sequence[int], p: SpherePoint, order: int) -> OrbitPhase:
    """Phase F(theta) = -i log <g o p, p> and amplitude jet u in the torus angles.

    u = d_k e^{-i k.theta} / ((2 pi)^d 2 pi^{n+1} c): the Haar density, the character
    and the constant of the exact kernel; the m-dependence (n+m)!/m! stays outside.
    """
    if len(k) != model.d:
        raise MismatchedVariables(f"weight {tuple(k)} for a {model.d}-torus")
    d = model.d
    F = _angle_phase(model, p, order)
    char = jet_exp(Jet(d, order, {unit_index(d, j): -1j * k[j] for j in range(d)}))
    scale = 1 / ((2 * mp.pi) ** d * 2 * mp.pi ** (model.n + 1) * model.levi_volume_const)
    return OrbitPhase(F=F, u=char.scale(scale), multiplicity=stabilizer_order(model, p), n=model.n)


def elementary_symmetric(n: int) -> list[mp.mpf]:
    """e_r(1, ..., n), the coefficients of prod_{i<=n} (m + i) = sum_r e_r m^{n-r}."""
    coeffs = [mp.mpf(1)]
    for i in range(1, n + 1):
        coeffs = [a + i * b for a, b in zip(coeffs + [0], [0] + coeffs)]
    return coeffs


def orbit_expansion(model: SphereModel, k: Sequence[int], p: SpherePoint, jmax: int) -> list[mp.mpf]:
    """b_0..b_jmax of S_{k,m}(p, p) ~ sum_j b_j m^{n - d/2 - j}, by stationary phase on the orbit."""
    phase = orbit_phase(model, k, p, order=2 * jmax + 2)
    expansion = sp_expand(build_phase(phase.F), phase.u, jmax)
    e = elementary_symmetric(model.n)
    coeffs = []
    for j in range(jmax + 1):
        series = mp.fsum(e[r] * expansion.terms[j - r] for r in range(min(j, model.n) + 1))
        coeffs.append(mp.re(phase.multiplicity * expansion.prefactor_const * series))
    log.debug("orbit expansion for k=%s: %s", tuple(k), [mp.nstr(b, 12) for b in coeffs])
    return coeffs


def adapted_transform(model: SphereModel, p: SpherePoint) -> mp.matrix:
    """S^{-1} with S = (Gram/2)^{1/2}: theta = S^{-1} y puts the orbit metric at 2I."""
    S = mp.sqrtm(orbit_gram(model, p) / 2)
    return mp.inverse(S)


def orbit_metric_jets(model: SphereModel, p: SpherePoint, order: int = 2) -> list[list[Jet]]:
    """Orbit metric in the adapted coordinates y; constant 2I along a torus orbit."""
    d = model.d
    S_inv = adapted_transform(model, p)
    gram = orbit_gram(model, p)
    G = S_inv.T * gram * S_inv
    return [[Jet.constant(d, order, mp.re(G[a, b])) for b in range(d)] for a in range(d)]


def orbit_delta2h(model: SphereModel, p: SpherePoint) -> mp.mpc:
    """Delta^2 h(0) of the orbit phase in adapted coordinates y, h = F - i|y|^2."""
    d = model.d
    F = _angle_phase(model, p, order=4)
    S_inv = adapted_transform(model, p)
    Fy = F.linear_change([[S_inv[i, j] for j in range(d)] for i in range(d)])
    h = Fy.drop_below(3)
    total = mp.mpc(0)
    for a in range(d):
        for b in range(d):
            alpha = tuple(x + y for x, y in zip(unit_index(d, a, 2), unit_index(d, b, 2)))
            total += h.derivative_at_zero(alpha)
    return total
