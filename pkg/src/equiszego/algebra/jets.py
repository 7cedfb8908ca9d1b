"""Truncated multivariate Taylor series (jets) with complex mpmath coefficients.

A Jet carries the exact finite Taylor data of a smooth function at the origin:
coefficients c_alpha of x^alpha for every multi-index |alpha| <= order. Phases,
amplitudes, BRT potentials and orbit metrics all travel through the library as
jets. Complex variables z_j = x_{2j} + i x_{2j+1} (0-based) are modeled as pairs of
real variables; `jet_wirtinger` gives the d/dz_j and d/dzbar_j views.

Coefficients are mpmath `mpc` at the working precision set by `equiszego.config`.
Absent keys are zero; a jet never stores a coefficient above its order. Jets are
immutable once constructed.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable, Literal, Mapping, Sequence

import numpy as np
from mpmath import mp

from equiszego import config  # noqa: F401  (applies working precision)
from equiszego.errors import InsufficientOrder, MismatchedVariables

MultiIndex = tuple[int, ...]


@lru_cache(maxsize=None)
def homogeneous_indices(num_vars: int, degree: int) -> tuple[MultiIndex, ...]:
    """Multi-indices of total degree `degree`, first variable descending."""
    if num_vars == 1:
        return ((degree,),)
    out: list[MultiIndex] = []
    for first in range(degree, -1, -1):
        for rest in homogeneous_indices(num_vars - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def multi_indices(num_vars: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices with |alpha| <= order, graded by degree."""
    out: list[MultiIndex] = []
    for degree in range(order + 1):
        out.extend(homogeneous_indices(num_vars, degree))
    return tuple(out)


def multi_factorial(alpha: MultiIndex) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def unit_index(num_vars: int, i: int, power: int = 1) -> MultiIndex:
    return tuple(power if j == i else 0 for j in range(num_vars))


class Jet:
    """Truncated Taylor series in `num_vars` real variables.

    Parameters
    ----------
    num_vars : int
        Number of real variables.
    order : int
        Truncation degree N; the jet knows every coefficient with |alpha| <= N.
    coeffs : mapping
        Multi-index -> number. Entries above `order` are dropped.
    """

    __slots__ = ("num_vars", "order", "_coeffs")

    def __init__(self, num_vars: int, order: int, coeffs: Mapping[MultiIndex, object] | None = None):
        if num_vars < 1:
            raise ValueError(f"num_vars must be positive, got {num_vars}")
        if order < 0:
            raise ValueError(f"order must be nonnegative, got {order}")
        clean: dict[MultiIndex, mp.mpc] = {}
        for alpha, value in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != num_vars or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for {num_vars} variables")
            if sum(alpha) > order:
                continue
            c = mp.mpc(value)
            if mp.isnan(c) or mp.isinf(c):
                raise ValueError(f"non-finite coefficient at {alpha}")
            if c != 0:
                clean[alpha] = c
        self.num_vars = num_vars
        self.order = order
        self._coeffs = clean

    # --- constructors ---

    @classmethod
    def constant(cls, num_vars: int, order: int, value: object = 1) -> Jet:
        return cls(num_vars, order, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, order: int, index: int) -> Jet:
        if not 0 <= index < num_vars:
            raise IndexError(f"variable {index} out of range for {num_vars} variables")
        return cls(num_vars, order, {unit_index(num_vars, index): 1})

    @classmethod
    def complex_variable(cls, n: int, order: int, j: int, conjugate: bool = False) -> Jet:
        """z_j = x_{2j} + i x_{2j+1} (or its conjugate) as a jet in 2n real variables."""
        if not 0 <= j < n:
            raise IndexError(f"complex variable {j} out of range for n={n}")
        sign = -1 if conjugate else 1
        return cls(2 * n, order, {unit_index(2 * n, 2 * j): 1, unit_index(2 * n, 2 * j + 1): sign * 1j})

    @classmethod
    def from_terms(cls, num_vars: int, order: int, terms: Iterable[tuple[MultiIndex, object]]) -> Jet:
        """Accumulate (alpha, coefficient) pairs; repeated indices add up."""
        acc: dict[MultiIndex, object] = {}
        for alpha, value in terms:
            alpha = tuple(alpha)
            acc[alpha] = acc.get(alpha, 0) + mp.mpc(value)
        return cls(num_vars, order, acc)

    # --- coefficient access ---

    def __getitem__(self, alpha: MultiIndex) -> mp.mpc:
        alpha = tuple(alpha)
        if len(alpha) != self.num_vars:
            raise MismatchedVariables(f"index {alpha} for a jet in {self.num_vars} variables")
        if sum(alpha) > self.order:
            raise InsufficientOrder(f"coefficient {alpha} above jet order {self.order}")
        return self._coeffs.get(alpha, mp.mpc(0))

    def items(self) -> Iterable[tuple[MultiIndex, mp.mpc]]:
        """Nonzero (alpha, coefficient) pairs."""
        return self._coeffs.items()

    def value(self) -> mp.mpc:
        return self._coeffs.get((0,) * self.num_vars, mp.mpc(0))

    def derivative_at_zero(self, alpha: MultiIndex) -> mp.mpc:
        """d^alpha f(0) = alpha! c_alpha."""
        return self[alpha] * multi_factorial(tuple(alpha))

    def valuation(self) -> int:
        """Lowest degree with a nonzero coefficient (order + 1 for the zero jet)."""
        if not self._coeffs:
            return self.order + 1
        return min(sum(alpha) for alpha in self._coeffs)

    def max_abs(self) -> mp.mpf:
        return max((abs(c) for c in self._coeffs.values()), default=mp.mpf(0))

    def distance(self, other: Jet) -> mp.mpf:
        """Largest coefficient difference up to the common order."""
        _check_vars(self, other)
        order = min(self.order, other.order)
        return jet_sub(self.truncate(order), other.truncate(order)).max_abs()

    # --- structural ---

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise InsufficientOrder(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.num_vars, order, self._coeffs)

    def homogeneous_part(self, degree: int) -> Jet:
        return Jet(self.num_vars, self.order,
                   {a: c for a, c in self._coeffs.items() if sum(a) == degree})

    def drop_below(self, degree: int) -> Jet:
        """Zero every coefficient of degree < `degree`."""
        return Jet(self.num_vars, self.order,
                   {a: c for a, c in self._coeffs.items() if sum(a) >= degree})

    def conjugate(self) -> Jet:
        """Complex conjugate of the function (variables are real)."""
        return Jet(self.num_vars, self.order, {a: mp.conj(c) for a, c in self._coeffs.items()})

    def real_part(self) -> Jet:
        return Jet(self.num_vars, self.order, {a: mp.re(c) for a, c in self._coeffs.items()})

    def imag_part(self) -> Jet:
        return Jet(self.num_vars, self.order, {a: mp.im(c) for a, c in self._coeffs.items()})

    def scale(self, factor: object) -> Jet:
        f = mp.mpc(factor)
        return Jet(self.num_vars, self.order, {a: f * c for a, c in self._coeffs.items()})

    def substitute(self, subs: Sequence[Jet]) -> Jet:
        """Composition f(g_1, ..., g_N) for jets g_i without constant term."""
        if len(subs) != self.num_vars:
            raise MismatchedVariables(f"{len(subs)} substitutions for {self.num_vars} variables")
        target_vars = subs[0].num_vars
        for g in subs:
            if g.num_vars != target_vars:
                raise MismatchedVariables("substituted jets disagree on num_vars")
            if g.value() != 0:
                raise ValueError("substituted jets must vanish at the origin")
        order = min([self.order] + [g.order for g in subs])
        one = Jet.constant(target_vars, order)
        monomials: dict[MultiIndex, Jet] = {(0,) * self.num_vars: one}
        total = Jet(target_vars, order)
        for alpha in multi_indices(self.num_vars, order):
            if alpha not in monomials:
                last = max(i for i, a in enumerate(alpha) if a)
                prev = alpha[:last] + (alpha[last] - 1,) + alpha[last + 1:]
                monomials[alpha] = jet_mul(monomials[prev], subs[last].truncate(order))
            c = self._coeffs.get(alpha)
            if c is not None:
                total = jet_add(total, monomials[alpha].scale(c))
        return total

    def linear_change(self, matrix: Sequence[Sequence[object]]) -> Jet:
        """f(A y): substitute x_i = sum_j A[i][j] y_j."""
        subs = [
            Jet(self.num_vars, self.order,
                {unit_index(self.num_vars, j): matrix[i][j] for j in range(self.num_vars)})
            for i in range(self.num_vars)
        ]
        return self.substitute(subs)

    def to_callable(self) -> Callable[..., np.ndarray]:
        """Vectorized float evaluator of the truncated polynomial, for numpy grids."""
        terms = [(alpha, complex(c)) for alpha, c in self._coeffs.items()]

        def evaluate(*xs: np.ndarray) -> np.ndarray:
            if len(xs) != self.num_vars:
                raise MismatchedVariables(f"expected {self.num_vars} arguments, got {len(xs)}")
            arrays = [np.asarray(x, dtype=float) for x in xs]
            total = np.zeros(np.broadcast(*arrays).shape, dtype=complex)
            for alpha, c in terms:
                term = np.full(total.shape, c, dtype=complex)
                for x, p in zip(arrays, alpha):
                    if p:
                        term = term * x ** p
                total = total + term
            return total

        return evaluate

    # --- operators ---

    def __add__(self, other: Jet | object) -> Jet:
        if isinstance(other, Jet):
            return jet_add(self, other)
        return jet_add(self, Jet.constant(self.num_vars, self.order, other))

    __radd__ = __add__

    def __sub__(self, other: Jet | object) -> Jet:
        if isinstance(other, Jet):
            return jet_sub(self, other)
        return jet_sub(self, Jet.constant(self.num_vars, self.order, other))

    def __rsub__(self, other: object) -> Jet:
        return jet_sub(Jet.constant(self.num_vars, self.order, other), self)

    def __neg__(self) -> Jet:
        return self.scale(-1)

    def __mul__(self, other: Jet | object) -> Jet:
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> Jet:
        if isinstance(other, Jet):
            return jet_mul(self, jet_power(other, -1))
        return self.scale(1 / mp.mpc(other))

    def __repr__(self) -> str:
        shown = ", ".join(f"{a}: {mp.nstr(c, 8)}" for a, c in sorted(self._coeffs.items())[:6])
        more = " ..." if len(self._coeffs) > 6 else ""
        return f"Jet(num_vars={self.num_vars}, order={self.order}, {{{shown}{more}}})"


def _check_vars(a: Jet, b: Jet) -> None:
    if a.num_vars != b.num_vars:
        raise MismatchedVariables(f"jets in {a.num_vars} and {b.num_vars} variables")


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_vars(a, b)
    order = min(a.order, b.order)
    out = dict(a.items())
    for alpha, c in b.items():
        out[alpha] = out.get(alpha, 0) + c
    return Jet(a.num_vars, order, out)


def jet_sub(a: Jet, b: Jet) -> Jet:
    return jet_add(a, b.scale(-1))


def jet_mul(a: Jet, b: Jet, order: int | None = None) -> Jet:
    """Truncated Cauchy product.

    By default the product has order min(a.order, b.order). A higher `order` may be
    requested when the factors vanish to low degree: the product is exact through
    min(a.order + val(b), b.order + val(a)).
    """
    _check_vars(a, b)
    limit = min(a.order, b.order)
    if order is not None:
        exact = min(a.order + b.valuation(), b.order + a.valuation())
        if order > exact:
            raise InsufficientOrder(f"product is exact only through degree {exact}, asked {order}")
        limit = order
    right = [(beta, sum(beta), c) for beta, c in b.items()]
    out: dict[MultiIndex, mp.mpc] = {}
    for alpha, ca in a.items():
        da = sum(alpha)
        if da > limit:
            continue
        for beta, db, cb in right:
            if da + db > limit:
                continue
            key = tuple(x + y for x, y in zip(alpha, beta))
            out[key] = out.get(key, 0) + ca * cb
    return Jet(a.num_vars, limit, out)


def jet_diff(a: Jet, alpha: MultiIndex) -> Jet:
    """Formal derivative d^alpha; the order drops by |alpha|."""
    alpha = tuple(alpha)
    if len(alpha) != a.num_vars:
        raise MismatchedVariables(f"derivative index {alpha} for {a.num_vars} variables")
    k = sum(alpha)
    if k > a.order:
        raise InsufficientOrder(f"derivative of degree {k} exceeds jet order {a.order}")
    out: dict[MultiIndex, mp.mpc] = {}
    for gamma, c in a.items():
        if any(g < s for g, s in zip(gamma, alpha)):
            continue
        beta = tuple(g - s for g, s in zip(gamma, alpha))
        factor = math.prod(math.perm(g, s) for g, s in zip(gamma, alpha))
        out[beta] = c * factor
    return Jet(a.num_vars, a.order - k, out)


def jet_wirtinger(a: Jet, kind: Literal["holo", "antiholo"], j: int) -> Jet:
    """d/dz_j = (d/dx_{2j} - i d/dx_{2j+1})/2, d/dzbar_j with the + sign."""
    if a.num_vars % 2:
        raise MismatchedVariables(f"Wirtinger view needs paired variables, got {a.num_vars}")
    if not 0 <= j < a.num_vars // 2:
        raise IndexError(f"complex index {j} out of range for n={a.num_vars // 2}")
    if kind not in ("holo", "antiholo"):
        raise ValueError(f"kind must be 'holo' or 'antiholo', got {kind!r}")
    dx = jet_diff(a, unit_index(a.num_vars, 2 * j))
    dy = jet_diff(a, unit_index(a.num_vars, 2 * j + 1))
    sign = -1 if kind == "holo" else 1
    return jet_add(dx, dy.scale(sign * 1j)).scale(mp.mpf(1) / 2)


def wirtinger_derivative_at_zero(a: Jet, holo: Sequence[int], antiholo: Sequence[int]) -> mp.mpc:
    """d_{z_holo...} d_{zbar_antiholo...} a at 0 (indices may repeat)."""
    out = a
    for j in holo:
        out = jet_wirtinger(out, "holo", j)
    for j in antiholo:
        out = jet_wirtinger(out, "antiholo", j)
    return out.value()


def _compose_series(t: Jet, series: Sequence[object]) -> Jet:
    """sum_k series[k] t^k for t(0) = 0, by Horner."""
    out = Jet.constant(t.num_vars, t.order, series[-1])
    for s in reversed(series[:-1]):
        out = jet_mul(out, t) + s
    return out


def jet_exp(a: Jet) -> Jet:
    c = a.value()
    t = a - c
    series = [mp.mpf(1) / mp.factorial(k) for k in range(a.order + 1)]
    return _compose_series(t, series).scale(mp.exp(c))


def jet_log1p(a: Jet) -> Jet:
    """log(1 + a). A nonzero constant term is factored out through `jet_log`."""
    if a.value() != 0:
        return jet_log(a + 1)
    series = [mp.mpf(0)] + [mp.mpf((-1) ** (k + 1)) / k for k in range(1, a.order + 1)]
    return _compose_series(a, series)


def jet_log(a: Jet) -> Jet:
    """Principal log(a) = log(c) + log1p(a/c - 1), c = a(0) != 0."""
    c = a.value()
    if c == 0:
        raise ZeroDivisionError("log of a jet with zero constant term")
    return jet_log1p(a.scale(1 / c) - 1) + mp.log(c)


def jet_power(a: Jet, exponent: object) -> Jet:
    """a^e = c^e (1 + t)^e with the binomial series, c = a(0) != 0 (principal branch)."""
    c = a.value()
    if c == 0:
        raise ZeroDivisionError("power of a jet with zero constant term")
    e = mp.mpmathify(exponent)
    t = a.scale(1 / c) - 1
    series = [mp.binomial(e, k) for k in range(a.order + 1)]
    return _compose_series(t, series).scale(mp.power(c, e))


def jet_sqrt(a: Jet) -> Jet:
    return jet_power(a, mp.mpf(1) / 2)


# --- jet-valued matrices (small, dense) ---

JetMatrix = list[list[Jet]]


def jet_det(matrix: Sequence[Sequence[Jet]]) -> Jet:
    """Determinant by cofactor expansion along the first row."""
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    total = None
    for col in range(size):
        minor = [[row[c] for c in range(size) if c != col] for row in matrix[1:]]
        term = jet_mul(matrix[0][col], jet_det(minor))
        if col % 2:
            term = -term
        total = term if total is None else jet_add(total, term)
    return total


def jet_matrix_at_zero(matrix: Sequence[Sequence[Jet]]) -> mp.matrix:
    return mp.matrix([[entry.value() for entry in row] for row in matrix])


def jet_matrix_inverse(matrix: Sequence[Sequence[Jet]]) -> JetMatrix:
    """Inverse of a jet matrix with invertible value at 0, by the Neumann series.

    M = M0 (I + M0^{-1} D) with D(0) = 0, so M^{-1} = sum_k (-M0^{-1} D)^k M0^{-1};
    k runs to the order since D vanishes at the origin.
    """
    size = len(matrix)
    num_vars = matrix[0][0].num_vars
    order = min(entry.order for row in matrix for entry in row)
    m0_inv = mp.inverse(jet_matrix_at_zero(matrix))

    def const(value: object) -> Jet:
        return Jet.constant(num_vars, order, value)

    # N = -M0^{-1} D
    delta = [[matrix[i][j].truncate(order) - matrix[i][j].value() for j in range(size)] for i in range(size)]
    neumann = [[sum((delta[l][j].scale(-m0_inv[i, l]) for l in range(size)), Jet(num_vars, order))
                for j in range(size)] for i in range(size)]
    power = [[const(m0_inv[i, j]) for j in range(size)] for i in range(size)]
    total = [row[:] for row in power]
    for _ in range(order):
        power = [[sum((jet_mul(neumann[i][l], power[l][j]) for l in range(size)), Jet(num_vars, order))
                  for j in range(size)] for i in range(size)]
        total = [[jet_add(total[i][j], power[i][j]) for j in range(size)] for i in range(size)]
    return total
