"""Asymptotic coefficient extraction from exact kernel samples.

Samples v(m) are modelled as sum_{j<J} c_j m^{base - j}. The data are rescaled to
w(m) = v(m) m^{-base} and fitted against the basis {m^{-j}}; half-integer bases stay
rational so no sample is ever squared.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from mpmath import mp

from equiszego.config import tolerance
from equiszego.errors import IllConditioned, InsufficientSamples

log = logging.getLogger("equiszego.fit")

# Relative change of c_0 under doubling m_min above which a fit is flagged unstable.
STABILITY_THRESHOLD = 1e-4


@dataclass(frozen=True, eq=False)
class ExpansionSamples:
    entries: list[tuple[int, mp.mpf]]
    exponent_base: Fraction
    parity: int | None = None    # m mod 2 when only one parity carries a nonempty slice

    def __post_init__(self) -> None:
        ms = [m for m, _ in self.entries]
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("sample degrees must be strictly increasing")
        if any(m <= 0 for m in ms):
            raise ValueError("sample degrees must be positive")
        if self.parity is not None and any(m % 2 != self.parity for m in ms):
            raise ValueError(f"samples declared parity {self.parity} but contain other degrees")
        if any(not mp.isfinite(v) for _, v in self.entries):
            raise ValueError("sample values must be finite")

    @classmethod
    def build(cls, pairs: Iterable[tuple[int, object]], exponent_base: Fraction | int, parity: int | None = None):
        entries = [(int(m), mp.mpf(v)) for m, v in pairs]
        return cls(entries=entries, exponent_base=Fraction(exponent_base), parity=parity)

    @property
    def degrees(self) -> list[int]:
        return [m for m, _ in self.entries]

    def scaled(self) -> list[tuple[int, mp.mpf]]:
        """(m, v(m) m^{-base}) pairs."""
        power = mp.mpf(self.exponent_base.numerator) / self.exponent_base.denominator
        return [(m, v * mp.mpf(m) ** (-power)) for m, v in self.entries]

    def tail(self, m_from: int) -> ExpansionSamples:
        return ExpansionSamples(
            entries=[(m, v) for m, v in self.entries if m >= m_from],
            exponent_base=self.exponent_base,
            parity=self.parity,
        )


@dataclass(frozen=True, eq=False)
class FitResult:
    coeffs: list[mp.mpf]
    residual: mp.mpf
    condition: mp.mpf
    stability: mp.mpf | None = None
    richardson: list[mp.mpf] = field(default_factory=list)
    uncertainties: list[mp.mpf] = field(default_factory=list)

    @property
    def unstable(self) -> bool:
        return self.stability is not None and self.stability > STABILITY_THRESHOLD


def _solve(samples: ExpansionSamples, J: int) -> tuple[list[mp.mpf], mp.mpf, mp.mpf]:
    scaled = samples.scaled()
    m_min = scaled[0][0]
    m_max = scaled[-1][0]
    rows, rhs = [], []
    for m, w in scaled:
        weight = (mp.mpf(m) / m_max) ** J
        # columns scaled by m_min^j so every column has entries of order one
        rows.append([weight * (mp.mpf(m_min) / m) ** j for j in range(J)])
        rhs.append(weight * w)
    A = mp.matrix(rows)
    b = mp.matrix(rhs)
    singular = mp.svd_r(A, compute_uv=False)
    spectrum = [abs(singular[r]) for r in range(J)]
    condition = max(spectrum) / min(spectrum)
    x, _ = mp.qr_solve(A, b)
    coeffs = [x[j] * mp.mpf(m_min) ** j for j in range(J)]

    upper = scaled[len(scaled) // 2:]
    residual = mp.mpf(0)
    for m, w in upper:
        model = mp.fsum(c * mp.mpf(m) ** (-j) for j, c in enumerate(coeffs))
        scale = abs(w) if w != 0 else mp.mpf(1)
        residual = max(residual, abs(model - w) / scale)
    return coeffs, residual, condition


def fit_coefficients(samples: ExpansionSamples, J: int, condition_limit: object | None = None) -> FitResult:
    """Weighted least squares for c_0..c_{J-1}; refits on m >= 2 m_min for the stability flag."""
    if J < 1:
        raise ValueError(f"J must be positive, got {J}")
    if len(samples.entries) < 2 * J:
        raise InsufficientSamples(f"{len(samples.entries)} samples for J={J}; need at least {2 * J}")
    m_min, m_max = samples.degrees[0], samples.degrees[-1]
    if m_max < 4 * m_min:
        raise InsufficientSamples(f"m_max/m_min = {m_max}/{m_min} < 4")
    limit = 1 / tolerance(0.4) if condition_limit is None else mp.mpf(condition_limit)

    coeffs, residual, condition = _solve(samples, J)
    if condition > limit:
        raise IllConditioned(f"basis condition {mp.nstr(condition, 5)} exceeds {mp.nstr(limit, 3)}")

    stability = None
    tail = samples.tail(2 * m_min)
    if len(tail.entries) >= J + 1:
        tail_coeffs, _, _ = _solve(tail, J)
        lead = abs(coeffs[0]) if coeffs[0] != 0 else mp.mpf(1)
        stability = abs(tail_coeffs[0] - coeffs[0]) / lead
    # a relative misfit r of the scaled data at m_ref moves c_j by about r |c_0| m_ref^j
    m_ref = mp.mpf(samples.degrees[len(samples.degrees) // 2])
    uncertainties = [residual * abs(coeffs[0]) * m_ref ** j for j in range(J)]
    result = FitResult(coeffs=coeffs, residual=residual, condition=condition, stability=stability,
                       uncertainties=uncertainties)
    log.info(
        "fit J=%d over m in [%d, %d]: c0=%s residual=%s condition=%s",
        J, m_min, m_max, mp.nstr(coeffs[0], 12), mp.nstr(residual, 3), mp.nstr(condition, 3),
    )
    if result.unstable:
        log.warning("leading coefficient moved by %s when m_min doubled", mp.nstr(stability, 3))
    return result


def richardson_sequence(samples: ExpansionSamples, depth: int = 8) -> list[mp.mpf]:
    """Polynomial extrapolation in h = 1/m to h = 0 through the largest 1, 2, ... samples.

    Entry r eliminates the powers h, ..., h^r using the r + 1 largest degrees; the
    last entry is the refined leading coefficient.
    """
    if len(samples.entries) < 3:
        raise InsufficientSamples(f"Richardson needs at least 3 samples, got {len(samples.entries)}")
    scaled = samples.scaled()[-depth:]
    hs = [1 / mp.mpf(m) for m, _ in scaled]
    level = [w for _, w in scaled]
    sequence = [level[-1]]
    size = len(level)
    for width in range(1, size):
        nxt = []
        for i in range(size - width):
            j = i + width
            nxt.append((hs[i] * level[i + 1] - hs[j] * level[i]) / (hs[i] - hs[j]))
        level = nxt
        sequence.append(level[-1])
    return sequence
