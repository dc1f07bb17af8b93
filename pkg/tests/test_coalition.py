import numpy as np
import pytest

from glauberlab.coalition import (CoalitionError, conditional_expectation, greedy_coalition, is_monotone, pin,
                                  pinned_expectation)
from glauberlab.models import ising, path_graph, uniform_measure
from glauberlab.observables import dictator, majority, parity, tribes
from glauberlab.statespace import StateSpace


def test_pin_majority_gives_or():
    space = StateSpace(3)
    g = pin(space, majority(space), [0])
    up = space.symbol_values() == 1
    assert np.array_equal(g, (up[:, 1] | up[:, 2]).astype(float))


def test_pin_down():
    space = StateSpace(3)
    g = pin(space, majority(space), [0], direction=-1)
    up = space.symbol_values() == 1
    assert np.array_equal(g, (up[:, 1] & up[:, 2]).astype(float))


def test_pinning_is_not_conditioning():
    m = ising(path_graph(3), 1.0)
    f = dictator(m.space, 2)
    assert pinned_expectation(m, f, [1]) == pytest.approx(m.expect(f))
    assert conditional_expectation(m, f, [1]) > m.expect(f) + 0.1


def test_monotonicity():
    space = StateSpace(4)
    assert is_monotone(space, majority(space))
    assert is_monotone(space, tribes(space, 2))
    assert not is_monotone(space, parity(space))


def test_majority3_uniform():
    m = uniform_measure(3)
    r = greedy_coalition(m, majority(m.space), 0.3)
    assert r.S == [0]
    assert r.trajectory[1] == 0.75
    assert r.succeeded and r.monotone_trajectory and r.gains_hold


def test_path_ising_budget():
    m = ising(path_graph(9), 0.2)
    r = greedy_coalition(m, majority(m.space), 0.1)
    assert r.succeeded and r.monotone_trajectory and r.gains_hold
    assert len(r.S) <= r.budget_bound
    assert len(set(r.S)) == len(r.S)


def test_csv():
    m = uniform_measure(3)
    r = greedy_coalition(m, majority(m.space), 0.3)
    assert r.to_csv().splitlines() == ["step,pinned_coordinate,p_t,influence_of_choice", "0,,0.5,", "1,0,0.75,0.5"]


@pytest.mark.parametrize("eps", [0.0, 0.5, 0.7])
def test_bad_epsilon(eps):
    m = uniform_measure(3)
    with pytest.raises(CoalitionError):
        greedy_coalition(m, majority(m.space), eps)


def test_rejections():
    m = uniform_measure(3)
    with pytest.raises(CoalitionError):
        greedy_coalition(m, parity(m.space), 0.2)
    with pytest.raises(CoalitionError):
        greedy_coalition(m, np.array([0, 0, 0, 0, 0, 0, 0, 1.0]), 0.2)
