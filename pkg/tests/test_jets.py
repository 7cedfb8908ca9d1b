import numpy as np
import pytest
from mpmath import mp

from equiszego.algebra.jets import (
    Jet,
    jet_det,
    jet_diff,
    jet_exp,
    jet_log,
    jet_log1p,
    jet_matrix_inverse,
    jet_mul,
    jet_power,
    jet_sqrt,
    jet_wirtinger,
    multi_indices,
    unit_index,
    wirtinger_derivative_at_zero,
)
from equiszego.errors import InsufficientOrder, MismatchedVariables

TOL = mp.mpf(10) ** -30


def test_multi_indices_counts():
    # C(N + order, N) monomials
    assert len(multi_indices(1, 6)) == 7
    assert len(multi_indices(2, 4)) == 15
    assert len(multi_indices(3, 2)) == 10


def test_mul_truncates_to_min_order():
    x = Jet.variable(1, 4, 0)
    one_plus = x + 1
    square = one_plus * one_plus
    assert square.order == 4
    assert square[(1,)] == 2
    assert square[(2,)] == 1


def test_mul_extended_order_when_factors_vanish():
    x = Jet.variable(1, 3, 0)
    product = jet_mul(x, x * x, order=4)
    assert product.order == 4
    assert product[(3,)] == 1
    with pytest.raises(InsufficientOrder):
        jet_mul(x, x, order=6)


def test_exp_and_log_are_inverse():
    x = Jet.variable(2, 6, 0)
    y = Jet.variable(2, 6, 1)
    f = x * mp.mpf("0.3") + y * x - y * y * mp.mpf("0.5")
    assert jet_log(jet_exp(f)).distance(f) < TOL


def test_exp_coefficients():
    e = jet_exp(Jet.variable(1, 5, 0))
    for k in range(6):
        assert abs(e[(k,)] - 1 / mp.factorial(k)) < TOL


def test_sqrt_squares_back():
    x = Jet.variable(1, 8, 0)
    f = 4 + x + x * x * 3
    root = jet_sqrt(f)
    assert abs(root.value() - 2) < TOL
    assert (root * root).distance(f) < TOL


def test_power_minus_one_is_reciprocal():
    x = Jet.variable(1, 6, 0)
    geometric = jet_power(1 - x, -1)
    for k in range(7):
        assert abs(geometric[(k,)] - 1) < TOL


def test_log_of_zero_constant_raises():
    with pytest.raises(ZeroDivisionError):
        jet_log(Jet.variable(1, 3, 0))


def test_diff_and_derivative_at_zero():
    x = Jet.variable(1, 5, 0)
    f = x * x * x * 2
    assert jet_diff(f, (1,))[(2,)] == 6
    assert f.derivative_at_zero((3,)) == 12
    with pytest.raises(InsufficientOrder):
        jet_diff(f, (6,))


def test_wirtinger_of_modulus_squared():
    z = Jet.complex_variable(1, 4, 0)
    zbar = Jet.complex_variable(1, 4, 0, conjugate=True)
    r2 = z * zbar
    # |z|^2 has real coefficients x^2 + y^2
    assert r2[(2, 0)] == 1 and r2[(0, 2)] == 1 and r2[(1, 1)] == 0
    assert abs(wirtinger_derivative_at_zero(r2, [0], [0]) - 1) < TOL
    assert abs(wirtinger_derivative_at_zero(r2 * r2, [0, 0], [0, 0]) - 4) < TOL
    assert jet_wirtinger(z, "antiholo", 0).max_abs() < TOL


def test_substitute_and_linear_change():
    x = Jet.variable(2, 4, 0)
    y = Jet.variable(2, 4, 1)
    f = x * x + x * y
    swapped = f.linear_change([[0, 1], [1, 0]])
    assert swapped[(0, 2)] == 1 and swapped[(1, 1)] == 1
    doubled = f.substitute([x * 2, y])
    assert doubled[(2, 0)] == 4 and doubled[(1, 1)] == 2


def test_substitute_requires_vanishing_jets():
    x = Jet.variable(1, 3, 0)
    with pytest.raises(ValueError):
        x.substitute([x + 1])


def test_mismatched_variables():
    with pytest.raises(MismatchedVariables):
        Jet.variable(1, 3, 0) + Jet.variable(2, 3, 0)


def test_det_and_inverse_of_jet_matrix():
    x = Jet.variable(1, 4, 0)
    one = Jet.constant(1, 4)
    matrix = [[one + x, x], [x, one * 2]]
    det = jet_det(matrix)
    # (1 + x) 2 - x^2
    assert det.value() == 2 and det[(1,)] == 2 and det[(2,)] == -1
    inverse = jet_matrix_inverse(matrix)
    for i in range(2):
        for j in range(2):
            entry = sum((jet_mul(matrix[i][l], inverse[l][j]) for l in range(2)), Jet(1, 4))
            target = 1 if i == j else 0
            assert entry.distance(Jet.constant(1, 4, target)) < TOL


def test_to_callable_matches_polynomial():
    import numpy as np

    x = Jet.variable(2, 3, 0)
    y = Jet.variable(2, 3, 1)
    f = (x * y * 3 + x * x * 1j + 2).to_callable()
    xs, ys = np.array([0.5, -1.0]), np.array([2.0, 0.25])
    np.testing.assert_allclose(f(xs, ys), 3 * xs * ys + 1j * xs ** 2 + 2)


def test_unit_index():
    assert unit_index(3, 1) == (0, 1, 0)
    assert unit_index(2, 0, 2) == (2, 0)


SHAPES = [(1, 6), (2, 4), (3, 3)]


def _random_jet(rng, num_vars, order, scale=1.0, constant=True):
    coeffs = {}
    for alpha in multi_indices(num_vars, order):
        if not constant and not any(alpha):
            continue
        re, im = rng.normal(scale=scale, size=2)
        coeffs[alpha] = mp.mpc(float(re), float(im))
    return Jet(num_vars, order, coeffs)


@pytest.mark.parametrize("num_vars,order", SHAPES)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ring_axioms(num_vars, order, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (_random_jet(rng, num_vars, order) for _ in range(3))
    assert (a * b).distance(b * a) < TOL
    assert ((a * b) * c).distance(a * (b * c)) < TOL
    assert (a * (b + c)).distance(a * b + a * c) < TOL
    assert (a * Jet.constant(num_vars, order)).distance(a) < TOL
    assert (a - a).max_abs() == 0


@pytest.mark.parametrize("num_vars,order", SHAPES)
@pytest.mark.parametrize("seed", [3, 4])
def test_exp_log1p_roundtrip(num_vars, order, seed):
    rng = np.random.default_rng(seed)
    f = _random_jet(rng, num_vars, order, scale=0.3, constant=False)
    assert (jet_exp(jet_log1p(f)) - 1).distance(f) < TOL
    assert jet_log1p(jet_exp(f) - 1).distance(f) < TOL


@pytest.mark.parametrize("num_vars,order", [(2, 5), (3, 4)])
@pytest.mark.parametrize("seed", [5, 6])
def test_partial_derivatives_commute(num_vars, order, seed):
    rng = np.random.default_rng(seed)
    a, b = _random_jet(rng, num_vars, order), _random_jet(rng, num_vars, order)
    for i in range(num_vars):
        for j in range(num_vars):
            ei, ej = unit_index(num_vars, i), unit_index(num_vars, j)
            both = tuple(x + y for x, y in zip(ei, ej))
            assert jet_diff(jet_diff(a, ei), ej).distance(jet_diff(jet_diff(a, ej), ei)) < TOL
            assert jet_diff(jet_diff(a, ei), ej).distance(jet_diff(a, both)) < TOL
        ei = unit_index(num_vars, i)
        leibniz = jet_diff(a, ei) * b + a * jet_diff(b, ei)
        assert jet_diff(a * b, ei).distance(leibniz) < TOL
