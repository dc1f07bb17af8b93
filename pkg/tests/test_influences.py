import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from glauberlab.influences import (NotBooleanError, effect, influence, influence_report, influences,
                                   sandwich_check)
from glauberlab.models import cycle_graph, ising, lattice_graph, path_graph, uniform_measure
from glauberlab.observables import dictator, majority, parity


def test_majority3_influences():
    m = uniform_measure(3)
    assert influences(m, majority(m.space)) == pytest.approx([0.5, 0.5, 0.5], abs=1e-15)


def test_majority9_max_influence():
    m = uniform_measure(9)
    assert influences(m, majority(m.space)).max() == pytest.approx(70 / 256, abs=1e-15)


def test_parity_and_dictator():
    m = ising(path_graph(4), 0.3)
    assert influences(m, parity(m.space)) == pytest.approx(np.ones(4))
    assert influences(m, dictator(m.space, 2)) == pytest.approx([0, 0, 1, 0])


@given(st.integers(2, 4), st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_influence_matches_oracle(n, beta, seed):
    m = ising(path_graph(n), beta)
    f = (np.random.default_rng(seed).random(m.space.total) < 0.5).astype(float)
    for i in range(n):
        assert influence(m, f, i) == pytest.approx(oracles.influence(m.probs, n, (-1, 1), f, i), rel=1e-12, abs=1e-15)


def test_effect_on_uniform_majority():
    # on the uniform measure, effect = E[f x_i] = influence / 2 for monotone f
    m = uniform_measure(5)
    f = majority(m.space)
    for i in range(5):
        assert effect(m, f, i) == pytest.approx(influence(m, f, i) / 2, abs=1e-14)


def test_effect_large_at_low_temperature():
    m = ising(lattice_graph(2, 1), 2.0)
    rep = influence_report(m, majority(m.space))
    assert rep.effect.min() / rep.max_influence > 5


def test_non_boolean_rejected():
    m = uniform_measure(2)
    with pytest.raises(NotBooleanError):
        influence(m, np.array([0, 0.5, 1, 1]), 0)


def test_report_csv():
    m = uniform_measure(3)
    rep = influence_report(m, majority(m.space))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "coordinate,influence,effect,norm1,norm2"
    assert len(lines) == 4
    assert rep.argmax == 0 and rep.total_influence == pytest.approx(1.5)


@given(st.integers(1, 4), st.floats(0.0, 1.2), st.sampled_from([1.0, 2.0]), st.integers(0, 2**31 - 1))
def test_sandwich_random_boolean(n, beta, p, seed):
    m = ising(cycle_graph(n), beta) if n >= 3 else ising(path_graph(n), beta) if n == 2 else uniform_measure(1)
    f = (np.random.default_rng(seed).random(m.space.total) < 0.4).astype(float)
    assert sandwich_check(m, f, p).passed


def test_sandwich_tight_case():
    # dictator on uniform: |L_0 f| = 1/2 everywhere, so E|L_0 f|^p = 2^-p = I / (q b)^p with b = 1
    m = uniform_measure(2)
    r = sandwich_check(m, dictator(m.space, 0), 1.0)
    assert r.lower_slack[0] == pytest.approx(0.0, abs=1e-15)
    assert math.isclose(r.upper_slack[0], 0.5)
