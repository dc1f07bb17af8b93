import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from glauberlab.glauber import (DynamicsError, apply_L, apply_Li, apply_P, build_L, build_P, diff_bound_slack,
                                dirichlet_form, entropy, lp_norm, semigroup, variance)
from glauberlab.models import cycle_graph, ising, path_graph, product_measure, uniform_measure
from glauberlab.observables import dictator, parity
from glauberlab.statespace import Alphabet, StateSpace

MODELS = {
    "uniform2": lambda: uniform_measure(2),
    "uniform4": lambda: uniform_measure(4),
    "path3-0.1": lambda: ising(path_graph(3), 0.1),
    "path3-0.3": lambda: ising(path_graph(3), 0.3, h=[0.2, 0.0, -0.1]),
    "cycle4-0.3": lambda: ising(cycle_graph(4), 0.3),
    "biased": lambda: product_measure([[0.8, 0.2], [0.4, 0.6]]),
}


@pytest.fixture(params=sorted(MODELS))
def measure(request):
    return MODELS[request.param]()


def test_P_matches_oracle(measure):
    n = measure.n
    for i in range(n):
        ref = oracles.resample_matrix(measure.probs, n, (-1, 1), i)
        assert np.allclose(build_P(measure, i).toarray(), ref, atol=1e-14)


def test_P_algebra(measure, rng):
    nu = measure.probs
    N = measure.space.total
    for i in range(measure.n):
        P = build_P(measure, i).toarray()
        assert np.allclose(nu @ P, nu, atol=1e-12)
        assert np.allclose(P @ P, P, atol=1e-12)
        Li = P - np.eye(N)
        assert np.allclose(Li @ Li, -Li, atol=1e-12)
        f, g = rng.standard_normal((2, N))
        assert nu @ (P @ f * g) == pytest.approx(nu @ (f * (P @ g)), abs=1e-12)
        assert np.allclose(apply_P(measure, f, i), P @ f, atol=1e-13)


def test_sparse_P_has_q_nonzeros_per_row():
    m = ising(path_graph(3), 0.2)
    P = build_P(m, 1)
    assert np.all(np.diff(P.indptr) == 2)


def test_nonneighbors_commute():
    m = ising(path_graph(4), 0.3)
    P = [build_P(m, i).toarray() for i in range(4)]
    assert np.abs(P[0] @ P[2] - P[2] @ P[0]).max() < 1e-14
    assert np.abs(P[0] @ P[1] - P[1] @ P[0]).max() > 1e-4


def test_generator_matches_oracle(measure):
    L, parts = build_L(measure)
    ref = oracles.generator(measure.probs, measure.n, (-1, 1))
    assert np.allclose(L.toarray(), ref, atol=1e-13)
    assert np.allclose(sum(p.toarray() for p in parts), ref, atol=1e-13)


def test_semigroup_matches_expm(measure):
    sg = semigroup(measure)
    for t in (0.0, 0.05, 0.7, 3.0):
        ref = oracles.heat(measure.probs, measure.n, (-1, 1), t)
        assert np.allclose(sg.matrix(t), ref, atol=1e-12)


def test_semigroup_law_and_inverse(measure):
    sg = semigroup(measure)
    Hs, Ht = sg.matrix(0.3), sg.matrix(0.45)
    assert np.allclose(Hs @ Ht, sg.matrix(0.75), atol=1e-12)
    assert np.allclose(sg.inverse_matrix(0.3) @ Hs, np.eye(len(measure.probs)), atol=1e-10)


def test_semigroup_batched_apply(measure, rng):
    sg = semigroup(measure)
    F = rng.standard_normal((measure.space.total, 5))
    assert np.allclose(sg.apply(0.4, F), sg.matrix(0.4) @ F, atol=1e-13)


def test_walsh_characters_are_eigenfunctions():
    space = StateSpace(4)
    m = uniform_measure(4)
    x = space.symbol_values()
    for S in ([0], [1, 3], [0, 1, 2], [0, 1, 2, 3]):
        chi = np.prod(x[:, S], axis=1).astype(float)
        assert np.allclose(apply_L(m, chi), -len(S) * chi, atol=1e-14)


def test_two_point_semigroup():
    m = uniform_measure(1)
    f = np.array([0.0, 1.0])
    for t in (0.1, 1.0, 2.5):
        expected = 0.5 + math.exp(-t) * (f - 0.5)
        assert np.allclose(semigroup(m).apply(t, f), expected, atol=1e-14)


def test_ergodicity(measure, rng):
    sg = semigroup(measure)
    f = rng.standard_normal(measure.space.total)
    t = 50 / sg.spectral_gap
    assert variance(measure, sg.apply(t, f)) <= 1e-8 * variance(measure, f)


def test_dense_cap():
    m = uniform_measure(6)
    with pytest.raises(DynamicsError):
        semigroup(m, max_states=32)


def test_functionals_on_dictator():
    m = uniform_measure(3)
    f = dictator(m.space, 0)
    assert variance(m, f) == pytest.approx(0.25)
    d = apply_Li(m, f, 0)
    assert lp_norm(m, d, 1) == pytest.approx(0.5)
    assert lp_norm(m, d, 2) ** 2 == pytest.approx(0.25)


def test_constant_function():
    m = ising(path_graph(3), 0.2)
    c = np.full(8, 2.5)
    assert entropy(m, c) == pytest.approx(0.0, abs=1e-15)
    assert variance(m, c) == pytest.approx(0.0, abs=1e-15)
    for p in (1, 1.5, 2, 7):
        assert lp_norm(m, c, p) == pytest.approx(2.5)


def test_entropy_against_naive(measure, rng):
    f = rng.random(measure.space.total) + 0.1
    nu = measure.probs
    naive = nu @ (f * np.log(f)) - (nu @ f) * math.log(nu @ f)
    assert entropy(measure, f) == pytest.approx(naive, rel=1e-10)


def test_norm_monotone_in_p(measure, rng):
    for _ in range(100):
        f = rng.standard_normal(measure.space.total)
        a, b, c = (lp_norm(measure, f, p) for p in (1.0, 1.5, 2.0))
        assert a <= b * (1 + 1e-12) and b <= c * (1 + 1e-12)
        assert a == pytest.approx(oracles.lp_norm(measure.probs, f, 1.0), rel=1e-12)


def test_dirichlet_form_two_routes(measure, rng):
    f, g = rng.standard_normal((2, measure.space.total))
    L = oracles.generator(measure.probs, measure.n, (-1, 1))
    assert dirichlet_form(measure, f) == pytest.approx(-(measure.probs @ (f * (L @ f))), rel=1e-10)
    assert dirichlet_form(measure, f, g) == pytest.approx(-(measure.probs @ (f * (L @ g))), rel=1e-9, abs=1e-12)
    assert dirichlet_form(measure, f) >= 0


def test_parity_energy_on_uniform():
    # each coordinate flips parity: E = sum_i E (L_i f)^2 = n/4
    m = uniform_measure(4)
    assert dirichlet_form(m, parity(m.space)) == pytest.approx(1.0)


@given(st.integers(1, 4), st.floats(0.0, 1.5), st.integers(0, 2**31 - 1))
def test_diff_bound_random(n, beta, seed):
    m = ising(path_graph(n), beta) if n > 1 else uniform_measure(1)
    f = np.random.default_rng(seed).standard_normal(m.space.total)
    for i in range(n):
        first, second = diff_bound_slack(m, f, i)
        assert first >= -1e-12 and second >= -1e-12


def test_diff_bound_ternary():
    space = StateSpace(2, Alphabet((0, 1, 2)))
    m = product_measure([[0.2, 0.3, 0.5], [0.6, 0.3, 0.1]], Alphabet((0, 1, 2)))
    f = np.random.default_rng(3).standard_normal(space.total)
    assert min(diff_bound_slack(m, f, 0) + diff_bound_slack(m, f, 1)) >= -1e-12
