import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_counts
from ncsvm.conformal import (ConformalError, ScoreTable, build_score_table, critical_counts,
                             decide, decide_batch, epsilon_crit, generalisation_bound, p_value,
                             prediction_region, vc_deviation)
from ncsvm.dataset import Dataset


class Affine:
    """Stand-in model with f(x) = a*x[0] + b."""

    def __init__(self, a=1.0, b=0.0):
        self.a, self.b = a, b

    def decision_values(self, X):
        return self.a * np.asarray(X, dtype=float)[:, 0] + self.b


# Six validation scores, two of them negative; a test point with f = 1.2 sits
# above three scores when labelled +1 and above one when labelled -1.
FIG1_SCORES = [-2.0, -1.0, 0.5, 1.5, 2.0, 3.0]
FIG1_X = [1.2]


def fig1_table():
    return ScoreTable(np.array([FIG1_SCORES]))


def test_figure1_p_values():
    t = fig1_table()
    assert Fraction(t.counts(0, 1.2), t.n) == Fraction(1, 2)
    assert Fraction(t.counts(0, -1.2), t.n) == Fraction(1, 6)
    assert p_value(t, 0, 1.2) == 0.5


def test_figure1_decision_and_region():
    d = epsilon_crit(fig1_table(), [Affine()], FIG1_X, seed=0)
    assert (d.predicted_label, d.y_crit, d.crit_count, d.tie_count) == (1, -1, 1, 1)
    assert d.epsilon_crit == 1 / 6
    assert prediction_region(fig1_table(), [Affine()], FIG1_X, 0.3, 0).labels == {1}


def test_region_extremes():
    t = fig1_table()
    assert prediction_region(t, [Affine()], FIG1_X, 0.0, 0).labels == {-1, 1}
    assert prediction_region(t, [Affine()], FIG1_X, 0.51, 0).labels == frozenset()
    # boundary label is included
    assert prediction_region(t, [Affine()], FIG1_X, 0.5, 0).labels == {1}
    with pytest.raises(ConformalError):
        prediction_region(t, [Affine()], FIG1_X, 1.5, 0)


def test_p_value_below_all_is_zero():
    assert p_value(fig1_table(), 0, -10.0) == 0.0


def test_build_score_table():
    val = Dataset([[-1.0], [1.0]], [-1, 1])
    np.testing.assert_array_equal(build_score_table([Affine()], val).scores, [[1.0, 1.0]])
    wrong = Dataset([[-1.0], [1.0]], [1, 1])
    assert build_score_table([Affine()], wrong).scores.min() < 0
    t = build_score_table([Affine(1, 0), Affine(-2, 1), Affine(0.5, 3)],
                          Dataset(np.arange(5.0)[:, None] - 2, [1, -1, 1, 1, -1]))
    assert t.scores.shape == (3, 5)
    assert np.all(np.diff(t.scores, axis=1) >= 0)


def test_duplicate_model_invariance():
    t1 = fig1_table()
    t2 = ScoreTable(np.array([FIG1_SCORES, FIG1_SCORES]))
    single = epsilon_crit(t1, [Affine()], FIG1_X)
    for seed in range(10):
        d = epsilon_crit(t2, [Affine(), Affine()], FIG1_X, seed=seed)
        assert d.epsilon_crit == single.epsilon_crit and d.tie_count == 2
        assert d.predicted_label == single.predicted_label


def test_twenty_point_table_matches_enumeration():
    rng = np.random.default_rng(20)
    scores = rng.normal(size=(2, 20))
    fvals = rng.normal(size=2)
    ref = brute_force_counts(scores, fvals)
    d = decide(ScoreTable(scores), fvals, np.random.default_rng(0))
    assert d.crit_count == min(ref.values())
    assert ref[(d.k_crit, d.y_crit)] == d.crit_count


def test_bound_values():
    assert generalisation_bound(0.0, 50, 110, 0.05) == pytest.approx(3.067665403118072, abs=1e-12)
    assert generalisation_bound(0.1, 50, 110, 0.05) == pytest.approx(3.167665403118072, abs=1e-12)
    assert generalisation_bound(0.0, 200, 110, 0.05) == pytest.approx(1.6045861193925844, abs=1e-12)
    assert generalisation_bound(0.0, 200, 110, 0.05) < generalisation_bound(0.0, 50, 110, 0.05)


def test_vc_deviation_values():
    assert vc_deviation(1, 50, 0.05 / 110) == pytest.approx(3.067665403118072, abs=1e-12)
    inner = math.sqrt((math.log(math.e * 50) + math.log(8 * 110 / 0.05)) / 50)
    assert inner == pytest.approx(0.5419903539077866, abs=1e-12)
    assert vc_deviation(1, 10**6, 0.05) == pytest.approx(0.0252430, abs=1e-7)
    assert vc_deviation(1, 10**6, 0.05 / 110) == pytest.approx(0.0280676, abs=1e-7)


@pytest.mark.parametrize("args", [(0, 5, 0.1), (1, 0, 0.1), (1, 5, 0.0), (1, 5, 1.0)])
def test_vc_domain(args):
    with pytest.raises(ConformalError):
        vc_deviation(*args)


@pytest.mark.parametrize("args", [(0.0, 0, 5, 0.1), (0.0, 5, 0, 0.1), (0.0, 5, 5, 1.5)])
def test_bound_domain(args):
    with pytest.raises(ConformalError):
        generalisation_bound(*args)


def test_identity_random_cases():
    rng = np.random.default_rng(100)
    for _ in range(100):
        n, K = int(rng.integers(1, 5000)), int(rng.integers(1, 500))
        delta, eps = float(rng.uniform(1e-4, 0.999)), float(rng.uniform())
        assert abs(generalisation_bound(eps, n, K, delta)
                   - (eps + vc_deviation(1, n, delta / K))) < 1e-12


def test_table_shape_errors():
    with pytest.raises(ConformalError):
        ScoreTable(np.zeros((0, 3)))
    with pytest.raises(ConformalError):
        critical_counts(fig1_table(), np.zeros((2, 4)))


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    t = ScoreTable(rng.integers(-3, 4, size=(4, 12)).astype(float))
    fvals = rng.integers(-3, 4, size=(4, 30)).astype(float)
    seeds = [[9, 0, i] for i in range(30)]
    batch = decide_batch(t, fvals, seeds)
    for i, d in enumerate(batch):
        assert d == decide(t, fvals[:, i], np.random.default_rng(seeds[i]))
        assert d.bound >= d.epsilon_crit
        assert d.predicted_label == -d.y_crit


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=30), st.integers(-6, 6), st.integers(-6, 6))
def test_p_value_lattice_and_monotone(scores, a, b):
    t = ScoreTable(np.array([scores], dtype=float))
    lo, hi = sorted((a, b))
    p_lo, p_hi = p_value(t, 0, lo), p_value(t, 0, hi)
    assert p_lo <= p_hi
    for p in (p_lo, p_hi):
        assert 0 <= p <= 1 and abs(p * t.n - round(p * t.n)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_deterministic(data_seed, seed):
    rng = np.random.default_rng(data_seed)
    t = ScoreTable(rng.integers(-2, 3, size=(3, 6)).astype(float))
    f = rng.integers(-2, 3, size=3).astype(float)
    assert decide(t, f, np.random.default_rng(seed)) == decide(t, f, np.random.default_rng(seed))
