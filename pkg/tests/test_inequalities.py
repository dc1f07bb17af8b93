import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glauberlab.constants import log_sobolev_constant, poincare_constant
from glauberlab.glauber import variance
from glauberlab.inequalities import (QuadratureError, gauss_legendre, kkl_extract, poincare_chain_check,
                                     talagrand_functional, technical_check, technical_integral,
                                     technical_integrand, variance_decomposition_check)
from glauberlab.models import cycle_graph, ising, path_graph, uniform_measure
from glauberlab.observables import dictator, majority


def test_quadrature_polynomial_and_smooth():
    val, _ = gauss_legendre(lambda t: t**5 - 2 * t, 0.0, 2.0)
    assert val == pytest.approx(64 / 6 - 4, rel=1e-13)
    val, _ = gauss_legendre(np.exp, 0.0, 1.0)
    assert val == pytest.approx(math.e - 1, rel=1e-13)


def test_quadrature_gives_up():
    with pytest.raises(QuadratureError):
        gauss_legendre(lambda t: np.sign(np.sin(200 * t)), 0.0, 1.0, max_nodes=64)


def test_technical_integral_vs_trapezoid():
    m = uniform_measure(3)
    f = dictator(m.space, 0)
    g = technical_integrand(m, f, 1.0)
    ts = np.linspace(0.0, 0.1, 100001)
    ys = g(ts)
    trap = float(np.sum((ys[1:] + ys[:-1]) * np.diff(ts)) / 2)
    assert technical_integral(m, f, 0.1, 1.0) == pytest.approx(trap, abs=1e-8)


def test_technical_integrand_nonincreasing():
    m = ising(path_graph(3), 0.2)
    f = np.random.default_rng(1).standard_normal(8)
    vals = technical_integrand(m, f, 0.6)(np.linspace(0, 3, 40))
    assert np.all(np.diff(vals) <= 1e-14)


def test_talagrand_dictator_uniform():
    # Var = 1/4, L_0 f = +-1/2 so ||.||_2 = ||.||_1 and the single term is 1/4
    m = uniform_measure(4)
    r = talagrand_functional(m, dictator(m.space, 0), rho=1.0)
    assert r.lhs == pytest.approx(0.25)
    assert r.terms == pytest.approx((0.25, 0, 0, 0))
    assert r.implied_constant == pytest.approx(1.0 / 16)


def test_talagrand_without_rho():
    m = uniform_measure(3)
    r = talagrand_functional(m, majority(m.space))
    assert r.implied_constant == pytest.approx(r.lhs / r.rhs_functional)


def test_talagrand_constant_function():
    m = uniform_measure(3)
    r = talagrand_functional(m, np.ones(8), 1.0)
    assert r.lhs == 0 and r.implied_constant == 0


def test_kkl_dictator():
    m = uniform_measure(4)
    r = kkl_extract(m, dictator(m.space, 0))
    assert r.max_influence == 1.0 and r.coordinate == 0
    assert r.alpha == pytest.approx(1 / (0.25 * math.log(4) / 4), rel=1e-12)
    assert r.alpha == pytest.approx(11.5416, abs=1e-4)


def test_kkl_degenerate_and_ties():
    m = uniform_measure(3)
    assert kkl_extract(m, np.zeros(8)).degenerate
    assert kkl_extract(m, majority(m.space)).coordinate == 0


def test_technical_check_finite():
    m = ising(cycle_graph(4), 0.2)
    rho = log_sobolev_constant(m).rho
    r = technical_check(m, majority(m.space), 0.05, rho)
    assert 0 < r.implied_constant < math.inf


@given(st.integers(0, 2**31 - 1), st.floats(0.05, 3.0))
def test_variance_decomposition(seed, T):
    m = ising(path_graph(3), 0.3)
    f = np.random.default_rng(seed).standard_normal(8)
    r = variance_decomposition_check(m, f, T)
    assert r.relative_residual <= 1e-8


def test_variance_decomposition_limits():
    m = ising(path_graph(3), 0.3)
    f = np.random.default_rng(0).standard_normal(8)
    lam = poincare_constant(m).lam
    r = variance_decomposition_check(m, f, 50 / lam)
    assert r.lhs == pytest.approx(variance(m, f), rel=1e-6)
    assert r.rhs == pytest.approx(variance(m, f), rel=1e-6)
    c = variance_decomposition_check(m, np.full(8, 3.0), 1.0)
    assert c.lhs == pytest.approx(0, abs=1e-14) and c.rhs == pytest.approx(0, abs=1e-14)


def test_energy_integral_is_half_the_decay():
    # the derivative of Var(H_t f) is -2 E(H_t f, H_t f)
    m = uniform_measure(1)
    f = np.array([0.0, 1.0])
    r = variance_decomposition_check(m, f, 1.0)
    assert r.lhs == pytest.approx(0.25 * (1 - math.exp(-2)), rel=1e-12)
    assert r.integral == pytest.approx(r.lhs / 2, rel=1e-12)


def test_poincare_chain():
    m = ising(cycle_graph(4), 0.3)
    lam = poincare_constant(m).lam
    for seed in range(20):
        f = np.random.default_rng(seed).standard_normal(16)
        var, bound = poincare_chain_check(m, f, 0.5, lam)
        assert var <= bound * (1 + 1e-10)
