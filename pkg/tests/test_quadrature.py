import numpy as np
import pytest

from equiszego.algebra.jets import Jet
from equiszego.asymptotics.quadrature import QuadratureConfig, composite_rule, cutoff, quadrature_oracle
from equiszego.errors import QuadratureNotConverged


def test_composite_rule_integrates_polynomials():
    pts, wts = composite_rule(-1.0, 3.0, nodes=5, panels=4)
    assert np.isclose(np.sum(wts), 4.0)
    assert np.isclose(np.sum(wts * pts ** 3), (3.0 ** 4 - 1.0) / 4)


def test_cutoff_is_one_inside_and_zero_at_edges():
    x = np.array([-2.0, -1.0, 0.0, 0.9, 1.5, 2.0])
    tau = cutoff(x, -2.0, 2.0)
    assert tau[0] == 0.0 and tau[-1] == 0.0
    assert np.allclose(tau[1:4], 1.0)
    assert 0.0 < tau[4] < 1.0


def test_gaussian_oracle():
    F = Jet.from_terms(1, 2, [((2,), 1j)])
    value = quadrature_oracle(F.to_callable(), Jet.constant(1, 2).to_callable(), 100, [(-2.0, 2.0)])
    assert abs(value - 0.1772453851) < 1e-9


def test_planar_gaussian_oracle():
    F = Jet.from_terms(2, 2, [((2, 0), 1j), ((0, 2), 1j)])
    value = quadrature_oracle(F.to_callable(), Jet.constant(2, 2).to_callable(), 50, [(-2.0, 2.0)] * 2)
    assert abs(value - np.pi / 50) < 1e-12


def test_unresolved_oscillation_raises():
    F = Jet.from_terms(1, 1, [((1,), 1)])
    config = QuadratureConfig(nodes=2, panels=1)
    with pytest.raises(QuadratureNotConverged):
        quadrature_oracle(F.to_callable(), Jet.constant(1, 1).to_callable(), 50, [(-2.0, 2.0)], config)
