from fractions import Fraction

import pytest
from mpmath import mp

from equiszego.asymptotics.fit import ExpansionSamples, fit_coefficients, richardson_sequence
from equiszego.errors import IllConditioned, InsufficientSamples


def _samples(f, ms, base, parity=None):
    return ExpansionSamples.build([(m, f(mp.mpf(m))) for m in ms], base, parity)


def test_exact_polynomial_data_is_recovered():
    # (m + 1)(m + 2) / (2 pi^3) = a0 m^2 + a1 m + a2
    samples = _samples(lambda m: (m + 1) * (m + 2) / (2 * mp.pi ** 3), range(1, 61), 2)
    fit = fit_coefficients(samples, 3)
    a0 = 1 / (2 * mp.pi ** 3)
    assert abs(fit.coeffs[0] - a0) < mp.mpf(10) ** -25
    assert abs(fit.coeffs[1] - 3 * a0) < mp.mpf(10) ** -25
    assert abs(fit.coeffs[2] - 2 * a0) < mp.mpf(10) ** -25
    assert fit.residual < mp.mpf(10) ** -25
    assert not fit.unstable


def test_half_integer_base_and_parity():
    base = Fraction(1, 2)
    samples = _samples(lambda m: 3 * mp.sqrt(m) * (1 + 1 / m + mp.mpf(2) / m ** 2), range(10, 201, 2), base, 0)
    fit = fit_coefficients(samples, 4)
    assert abs(fit.coeffs[0] - 3) < mp.mpf(10) ** -20
    assert abs(fit.coeffs[1] - 3) < mp.mpf(10) ** -18
    assert abs(fit.coeffs[2] - 6) < mp.mpf(10) ** -16


def test_truncated_series_fits_leading_terms():
    samples = _samples(lambda m: 2 + 1 / m + mp.exp(-m / 5) / m, range(50, 401), 0)
    fit = fit_coefficients(samples, 5)
    assert abs(fit.coeffs[0] - 2) < mp.mpf(10) ** -6
    assert fit.stability is not None and not fit.unstable


def test_richardson_on_sqrt_series():
    samples = _samples(lambda m: 3 * mp.sqrt(m) * (1 + 1 / m), range(100, 801, 100), Fraction(1, 2))
    sequence = richardson_sequence(samples)
    assert abs(sequence[-1] - 3) < mp.mpf(10) ** -20
    # first entry is the raw scaled value at the largest m
    assert abs(sequence[0] - 3 * (1 + mp.mpf(1) / 800)) < mp.mpf(10) ** -30


def test_too_few_samples():
    samples = _samples(lambda m: m, range(10, 60, 10), 1)
    with pytest.raises(InsufficientSamples):
        fit_coefficients(samples, 3)
    with pytest.raises(InsufficientSamples):
        richardson_sequence(_samples(lambda m: m, [10, 20], 1))


def test_narrow_range_rejected():
    samples = _samples(lambda m: m, range(100, 300), 1)
    with pytest.raises(InsufficientSamples):
        fit_coefficients(samples, 3)


def test_condition_limit():
    samples = _samples(lambda m: 1 + 1 / m, range(50, 401), 0)
    with pytest.raises(IllConditioned):
        fit_coefficients(samples, 5, condition_limit=1)


def test_samples_validate_ordering_and_parity():
    with pytest.raises(ValueError):
        ExpansionSamples.build([(4, 1), (2, 1)], 0)
    with pytest.raises(ValueError):
        ExpansionSamples.build([(2, 1), (3, 1)], 0, parity=0)
    with pytest.raises(ValueError):
        ExpansionSamples.build([(0, 1), (3, 1)], 0)


def test_uncertainties_track_the_residual():
    exact = fit_coefficients(_samples(lambda m: 2 + 1 / m + 3 / m ** 2, range(20, 201), 0), 4)
    assert len(exact.uncertainties) == 4
    assert max(exact.uncertainties) < mp.mpf(10) ** -20

    noisy = fit_coefficients(_samples(lambda m: 2 + 1 / m + 3 / m ** 2 + (-1) ** int(m) * mp.mpf(10) ** -8,
                                      range(20, 201), 0), 4)
    assert noisy.uncertainties[0] > mp.mpf(10) ** -10
    assert all(a <= b for a, b in zip(noisy.uncertainties, noisy.uncertainties[1:]))
    assert abs(noisy.coeffs[0] - 2) < 10 * noisy.uncertainties[0]
