import numpy as np
import pytest
from mpmath import mp

from equiszego.algebra.jets import Jet
from equiszego.asymptotics.stationary_phase import build_phase, lj_apply, prefactor_constant, sp_expand
from equiszego.errors import BadImaginaryPart, DegenerateHessian, InsufficientOrder, NonStationary

TOL = mp.mpf(10) ** -25


def _jet(num_vars, order, terms):
    return Jet.from_terms(num_vars, order, terms)


def test_gaussian_prefactor_is_sqrt_pi():
    phase = build_phase(_jet(1, 6, [((2,), 1j)]))
    # (det(F''/(2 pi i)))^{-1/2} = (1/pi)^{-1/2}
    assert abs(prefactor_constant(phase) - mp.sqrt(mp.pi)) < TOL


def test_gaussian_expansion_is_exact():
    phase = build_phase(_jet(1, 6, [((2,), 1j)]))
    expansion = sp_expand(phase, Jet.constant(1, 6), jmax=2)
    assert expansion.terms[1] == 0 and expansion.terms[2] == 0
    for m in (1, 7, 50, 800):
        assert abs(expansion.evaluate(m) - mp.sqrt(mp.pi / m)) < TOL * mp.sqrt(mp.pi / m)


def test_planar_gaussian():
    phase = build_phase(_jet(2, 6, [((2, 0), 1j), ((0, 2), 1j)]))
    expansion = sp_expand(phase, Jet.constant(2, 6), jmax=2)
    assert abs(expansion.evaluate(10) - mp.pi / 10) < TOL


def test_quartic_first_correction():
    # int e^{-m(x^2 + x^4)} dx = sqrt(pi/m) (1 - 3/(4m) + ...)
    phase = build_phase(_jet(1, 6, [((2,), 1j), ((4,), 1j)]))
    assert abs(lj_apply(phase, Jet.constant(1, 6), 1) - mp.mpf(-3) / 4) < TOL


def test_quadratic_amplitude_first_correction():
    # int e^{-m x^2} x^2 dx = sqrt(pi/m) / (2m)
    phase = build_phase(_jet(1, 6, [((2,), 1j)]))
    u = _jet(1, 6, [((2,), 1)])
    assert lj_apply(phase, u, 0) == 0
    assert abs(lj_apply(phase, u, 1) - mp.mpf(1) / 2) < TOL


def test_skip_cubic_agrees_when_cubic_vanishes():
    phase = build_phase(_jet(1, 8, [((2,), 1j), ((4,), 1j), ((6,), 2j)]))
    u = _jet(1, 8, [((0,), 1), ((2,), 3)])
    for j in range(3):
        assert abs(lj_apply(phase, u, j) - lj_apply(phase, u, j, skip_cubic=True)) < TOL


def test_skip_cubic_rejects_cubic_phase():
    phase = build_phase(_jet(1, 6, [((2,), 1j), ((3,), 1)]))
    with pytest.raises(ValueError):
        lj_apply(phase, Jet.constant(1, 6), 1, skip_cubic=True)


def test_constant_phase_value_enters_as_oscillation():
    phase = build_phase(_jet(1, 6, [((0,), 2), ((2,), 1j)]))
    expansion = sp_expand(phase, Jet.constant(1, 6), jmax=0)
    m = mp.mpf(3)
    assert abs(expansion.evaluate(m) - mp.expj(2 * m) * mp.sqrt(mp.pi / m)) < TOL


def test_rejects_nonstationary_phase():
    with pytest.raises(NonStationary):
        build_phase(_jet(1, 4, [((1,), 1), ((2,), 1j)]))


def test_rejects_degenerate_hessian():
    with pytest.raises(DegenerateHessian):
        build_phase(_jet(2, 4, [((2, 0), 1j)]))


def test_rejects_bad_imaginary_parts():
    with pytest.raises(BadImaginaryPart):
        build_phase(_jet(1, 4, [((0,), 1j), ((2,), 1j)]))
    with pytest.raises(BadImaginaryPart):
        build_phase(_jet(1, 4, [((2,), -1j)]))


def test_rejects_short_jets():
    with pytest.raises(InsufficientOrder):
        build_phase(Jet.variable(1, 1, 0))


def test_order_too_low_for_requested_term():
    phase = build_phase(_jet(1, 4, [((2,), 1j), ((3,), 1)]))
    with pytest.raises(InsufficientOrder):
        lj_apply(phase, Jet.constant(1, 4), 3)


CHANGE_OF_VARIABLES = {
    1: ([((2,), 1 + 1j), ((3,), 0.5), ((4,), 0.5j)], [((0,), 1), ((1,), 0.5), ((2,), 2)]),
    2: ([((2, 0), 1j), ((1, 1), 0.5j), ((0, 2), 1j), ((3, 0), 0.3), ((1, 2), 0.4), ((2, 2), 0.2j), ((0, 4), 0.1j)],
        [((0, 0), 1), ((1, 0), 0.5), ((0, 2), 1)]),
    3: ([((2, 0, 0), 1j), ((0, 2, 0), 2j), ((0, 0, 2), 1j), ((1, 0, 1), 0.5j), ((1, 1, 1), 0.3), ((0, 0, 4), 0.2j)],
        [((0, 0, 0), 1), ((0, 1, 1), 1)]),
}


@pytest.mark.parametrize("num_vars", [1, 2, 3])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_expansion_invariant_under_linear_change(num_vars, seed):
    # int e^{i m F(Ay)} u(Ay) dy = |det A|^{-1} int e^{i m F(x)} u(x) dx, term by term in m
    rng = np.random.default_rng(seed)
    while True:
        A = rng.normal(size=(num_vars, num_vars)) + np.eye(num_vars)
        if abs(np.linalg.det(A)) > 0.2:
            break
    A = [[mp.mpf(float(v)) for v in row] for row in A]
    det = abs(mp.det(mp.matrix(A)))

    phase_terms, amplitude_terms = CHANGE_OF_VARIABLES[num_vars]
    F = _jet(num_vars, 6, phase_terms)
    u = _jet(num_vars, 6, amplitude_terms)
    original = sp_expand(build_phase(F), u, jmax=2)
    changed = sp_expand(build_phase(F.linear_change(A)), u.linear_change(A), jmax=2)

    assert changed.prefactor_power == original.prefactor_power
    for j in range(3):
        expected = original.prefactor_const * original.terms[j] / det
        assert abs(changed.prefactor_const * changed.terms[j] - expected) < TOL * max(1, abs(expected))
