import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from kdassoc.density import (SIGMA2_MAX, SIGMA2_MIN, LooLikelihood, ModelParams,
                             loo_log_density_group, loo_log_lik_alt, loo_log_lik_null,
                             rank_transform)
from kdassoc.table import DataTable, VariableGrouping

# log of a N(0, 0.5^2) density at 0.5, by hand
HAND_LOG_PHI = -0.7257913526447274


def test_rank_transform_distinct():
    t = DataTable(("a",), np.array([[10.0], [30.0], [20.0]]))
    np.testing.assert_array_equal(rank_transform(t).values[:, 0], [1 / 3, 1.0, 2 / 3])


def test_rank_transform_midranks():
    t = DataTable(("a",), np.array([[5.0], [5.0], [9.0]]))
    np.testing.assert_array_equal(rank_transform(t).values[:, 0], [0.5, 0.5, 1.0])


def test_rank_transform_exp_invariant():
    a = DataTable(("a",), np.array([[10.0], [30.0], [20.0]]))
    b = DataTable(("a",), np.exp(np.array([[10.0], [30.0], [20.0]])))
    assert np.array_equal(rank_transform(a).values, rank_transform(b).values)


def test_rank_transform_leaves_input_alone():
    vals = np.array([[3.0, 1.0], [1.0, 2.0], [2.0, 2.0]])
    t = DataTable(("a", "b"), vals)
    rank_transform(t)
    np.testing.assert_array_equal(t.values, vals)


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=30))
def test_rank_transform_matches_counting(col):
    t = DataTable(("a",), np.array(col, dtype=float))
    np.testing.assert_allclose(rank_transform(t).values[:, 0], oracles.midranks(col),
                               rtol=0, atol=1e-15)


def test_loo_density_two_points():
    out = loo_log_density_group(np.array([[0.5], [1.0]]), [0], 0.25)
    np.testing.assert_allclose(out, [HAND_LOG_PHI, HAND_LOG_PHI], rtol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_loo_density_identical_points(d):
    vals = np.full((3, d), 0.4)
    sigma2 = 0.01
    out = loo_log_density_group(vals, range(d), sigma2)
    np.testing.assert_allclose(out, -0.5 * d * math.log(2 * math.pi * sigma2), rtol=1e-14)


def test_loo_density_matches_double_loop(rng):
    vals = rng.random((4, 2))
    rows = vals.tolist()
    for sigma2 in (1e-3, 0.05, 0.7):
        got = loo_log_density_group(vals, [0, 1], sigma2)
        want = [math.log(oracles.loo_density(rows, [0, 1], sigma2, i)) for i in range(4)]
        np.testing.assert_allclose(got, want, rtol=1e-12)


def test_loo_density_tiny_bandwidth_stays_finite(rng):
    vals = rng.random((50, 2))
    out = loo_log_density_group(vals, [0, 1], SIGMA2_MIN)
    assert np.all(np.isfinite(out))


def test_null_two_points_by_hand():
    ranks = np.array([[0.5, 0.5], [1.0, 1.0]])
    got = loo_log_lik_null(ranks, VariableGrouping.of([0], [1]), 0.25)
    assert got == pytest.approx(4 * HAND_LOG_PHI, rel=1e-14)
    assert got == pytest.approx(-2.90316, abs=1e-5)


def test_null_is_sum_of_group_densities(rng):
    vals = rng.random((12, 3))
    g = VariableGrouping.of([0, 2], [1])
    want = (loo_log_density_group(vals, [0, 2], 0.02).sum()
            + loo_log_density_group(vals, [1], 0.02).sum())
    assert loo_log_lik_null(vals, g, 0.02) == pytest.approx(want, rel=1e-14)


def test_null_three_groups_brute_force(rng):
    vals = rng.random((7, 4))
    groups = [[0], [1, 3], [2]]
    got = loo_log_lik_null(vals, VariableGrouping.of(*groups), 0.03)
    assert got == pytest.approx(oracles.null_loglik(vals.tolist(), groups, 0.03), rel=1e-12)


def test_alt_w_zero_equals_null_exactly(rng):
    vals = rng.random((15, 2))
    g = VariableGrouping.of([0], [1])
    null = loo_log_lik_null(vals, g, 0.01)
    for s_d in (SIGMA2_MIN, 0.003, 1.0):
        assert loo_log_lik_alt(vals, g, ModelParams(0.01, s_d, 0.0)) == null


def test_alt_w_one_two_points_by_hand():
    ranks = np.array([[0.5, 0.5], [1.0, 1.0]])
    # one 2-D kernel term at offset (0.5, 0.5): (2 pi 0.25)^-1 exp(-1)
    want = 2 * (-math.log(2 * math.pi * 0.25) - 1.0)
    got = loo_log_lik_alt(ranks, VariableGrouping.of([0], [1]), ModelParams(0.25, 0.25, 1.0))
    assert got == pytest.approx(want, rel=1e-14)


def test_alt_brute_force_n6(rng):
    vals = rng.random((6, 2))
    got = loo_log_lik_alt(vals, VariableGrouping.of([0], [1]), ModelParams(0.02, 0.005, 0.5))
    want = oracles.alt_loglik(vals.tolist(), [[0], [1]], 0.02, 0.005, 0.5)
    assert got == pytest.approx(want, rel=1e-12)


def test_model_params_bounds():
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.1, 0.5)
    with pytest.raises(ValueError):
        ModelParams(0.1, 2.0, 0.5)
    with pytest.raises(ValueError):
        ModelParams(0.1, 0.1, 1.5)


def test_lik_cache_returns_same_values(rng):
    vals = rng.random((20, 2))
    lik = LooLikelihood(vals, VariableGrouping.of([0], [1]), cache_size=2)
    first = [lik.null(s) for s in (0.01, 0.02, 0.03, 0.01)]
    fresh = LooLikelihood(vals, VariableGrouping.of([0], [1]))
    assert first == [fresh.null(s) for s in (0.01, 0.02, 0.03, 0.01)]


# ---- property checks -------------------------------------------------------

sigma2s = st.floats(SIGMA2_MIN, SIGMA2_MAX)
weights = st.floats(0.0, 1.0)


@st.composite
def small_tables(draw, max_n=10, max_d=4):
    n = draw(st.integers(3, max_n))
    d = draw(st.integers(2, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    vals = np.random.default_rng(seed).standard_normal((n, d))
    split = draw(st.integers(1, d - 1))
    return DataTable(tuple(f"c{i}" for i in range(d)), vals), split


@settings(max_examples=60, deadline=None)
@given(small_tables(), sigma2s, sigma2s, weights)
def test_brute_force_equivalence(tab, s_i, s_d, w):
    table, split = tab
    groups = [list(range(split)), list(range(split, table.d))]
    ranked = rank_transform(table)
    g = VariableGrouping.of(*groups)
    rows = ranked.values.tolist()
    assert loo_log_lik_null(ranked, g, s_i) == pytest.approx(
        oracles.null_loglik(rows, groups, s_i), rel=1e-10)
    assert loo_log_lik_alt(ranked, g, ModelParams(s_i, s_d, w)) == pytest.approx(
        oracles.alt_loglik(rows, groups, s_i, s_d, w), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(small_tables(max_n=30), sigma2s, sigma2s, weights)
def test_group_order_swap_is_bit_identical(tab, s_i, s_d, w):
    table, split = tab
    a, b = list(range(split)), list(range(split, table.d))
    ranked = rank_transform(table)
    p = ModelParams(s_i, s_d, w)
    ab = VariableGrouping.of(a, b)
    ba = VariableGrouping.of(b, a)
    assert loo_log_lik_null(ranked, ab, s_i) == loo_log_lik_null(ranked, ba, s_i)
    assert loo_log_lik_alt(ranked, ab, p) == loo_log_lik_alt(ranked, ba, p)


@settings(max_examples=40, deadline=None)
@given(small_tables(max_n=30), sigma2s, sigma2s)
def test_w_zero_reduces_to_null(tab, s_i, s_d):
    table, split = tab
    g = VariableGrouping.of(range(split), range(split, table.d))
    ranked = rank_transform(table)
    assert loo_log_lik_alt(ranked, g, ModelParams(s_i, s_d, 0.0)) == \
        loo_log_lik_null(ranked, g, s_i)


@settings(max_examples=40, deadline=None)
@given(small_tables(max_n=30), st.floats(SIGMA2_MIN, SIGMA2_MAX), st.floats(SIGMA2_MIN, SIGMA2_MAX),
       weights)
def test_likelihoods_finite_and_monotone_invariant(tab, s_i, s_d, w):
    table, split = tab
    g = VariableGrouping.of(range(split), range(split, table.d))
    p = ModelParams(s_i, s_d, w)
    warped = DataTable(table.names, np.column_stack(
        [np.exp(table.values[:, 0]), table.values[:, 1] ** 3, 5 * table.values[:, 2:] - 1]))
    r0, r1 = rank_transform(table), rank_transform(warped)
    v0 = loo_log_lik_alt(r0, g, p)
    assert math.isfinite(v0)
    assert v0 == loo_log_lik_alt(r1, g, p)
