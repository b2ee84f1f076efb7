from dataclasses import replace

import numpy as np
import pytest

from dksel import linalg
from dksel.errors import InvalidParamsError, TooLargeError
from dksel.frankwolfe import certify_vertex, solve_fw
from dksel.models import SelectParams
from dksel.objective import swap_taylor_check
from dksel.oracle import (brute_force_ccbqp, grid_slack, neighborhood_is_local_max, relaxed_grid_max,
                          saddle_escape, tightness_gap)
from dksel.pool import validate_pool

from helpers import dense_objective, enumerate_vertices, indicator, random_instance


def test_full_set_when_k_equals_n(rng):
    matrix, c = random_instance(rng, 5, 3)
    result = brute_force_ccbqp(matrix, c, SelectParams(k=5))
    assert result.best_set == (0, 1, 2, 3, 4)
    assert result.best_value == pytest.approx(dense_objective(matrix, c, np.ones(5), 5, 0.5, 2.0))


def test_theta_one_best_set_is_topk(rng):
    matrix, c = random_instance(rng, 9, 3)
    result = brute_force_ccbqp(matrix, c, SelectParams(k=3, theta=1.0))
    assert list(result.best_set) == linalg.topk_indices(c, 3).tolist()


def test_value_table_matches_dense_oracle(rng):
    matrix, c = random_instance(rng, 7, 3)
    params = SelectParams(k=3, theta=0.3)
    result = brute_force_ccbqp(matrix, c, params, keep_table=True)
    assert len(result.value_table) == 35
    for subset, value in result.value_table.items():
        assert value == pytest.approx(dense_objective(matrix, c, indicator(7, subset), 3, 0.3, 2.0), abs=1e-10)
    assert result.best_value == max(result.value_table.values())


def test_local_maxima_match_certificates(rng):
    matrix, c = random_instance(rng, 9, 4, clusters=3)
    params = SelectParams(k=3, theta=0.6)
    result = brute_force_ccbqp(matrix, c, params)
    certified = [v for v in enumerate_vertices(9, 3)
                 if certify_vertex(matrix, c, indicator(9, v), params).is_local_max]
    assert sorted(result.local_maxima) == certified
    assert result.best_set in result.local_maxima


def test_guard_names_the_limit(rng):
    matrix, c = random_instance(rng, 30, 3)
    with pytest.raises(TooLargeError, match='guard'):
        brute_force_ccbqp(matrix, c, SelectParams(k=15))


@pytest.mark.slow
def test_fw_against_exhaustive_search():
    """Exhaustive search over 100 random tiny instances, single start and multi-start"""
    rng = np.random.default_rng(7)
    single_start, at_least, equal = 0, 0, 0
    for trial in range(100):
        n = int(rng.integers(6, 13))
        k = int(rng.integers(2, 5))
        theta = float(rng.choice(np.round(np.arange(0.1, 1.0, 0.1), 1)))
        matrix, c = random_instance(rng, n, 4, clusters=3)
        params = SelectParams(k=k, theta=theta)
        best = brute_force_ccbqp(matrix, c, params, find_local_maxima=False).best_value
        plain = solve_fw(matrix, c, params)
        assert plain.integral and len(plain.selected) == k
        assert plain.local_max_certified
        if plain.objective >= best - 1e-9 * abs(best):
            single_start += 1
        report = solve_fw(matrix, c, replace(params, restarts=8, polish=True))
        assert report.integral and len(report.selected) == k
        assert report.local_max_certified
        assert report.objective >= plain.objective - 1e-9 * abs(plain.objective)
        if report.objective >= best - 1e-9 * abs(best):
            at_least += 1
        if report.objective == pytest.approx(best, rel=1e-12, abs=1e-12):
            equal += 1
    # a single top-k start lands on a local maximum, not always the global one
    assert single_start >= 40
    assert at_least >= 90
    assert equal >= 60


def test_tightness_with_lambda_two(rng):
    matrix, c = random_instance(rng, 4, 3)
    params = SelectParams(k=2, theta=0.0)
    assert tightness_gap(matrix, c, params, step=0.05) <= 1e-9


def test_tightness_fails_without_shift():
    # two near duplicates sharing the top relevance: splitting mass between them pays at lambda = 0
    rows = np.array([[1.0, 0.0, 0.0], [0.999, 0.0447, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    matrix = validate_pool(rows)
    c = np.array([0.9, 0.9, 0.1, 0.0])
    params = SelectParams(k=2, theta=0.5, lam=0.0, allow_small_lambda=True)
    assert tightness_gap(matrix, c, params, step=0.1) > 0


def test_grid_search_guards(rng):
    matrix, c = random_instance(rng, 9, 3)
    with pytest.raises(TooLargeError):
        relaxed_grid_max(matrix, c, SelectParams(k=2))
    small, c_small = random_instance(rng, 4, 3)
    with pytest.raises(InvalidParamsError):
        relaxed_grid_max(small, c_small, SelectParams(k=2), step=0.3)


def test_grid_max_is_feasible(rng):
    matrix, c = random_instance(rng, 5, 3)
    value, point = relaxed_grid_max(matrix, c, SelectParams(k=2), step=0.25)
    assert point.sum() == pytest.approx(2.0)
    assert value == pytest.approx(dense_objective(matrix, c, point, 2, 0.5, 2.0))
    assert grid_slack(matrix, c, SelectParams(k=2), 0.25) > 0


def test_saddle_swap_gain_is_closed_form():
    matrix = validate_pool(np.array([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]]))
    params = SelectParams(k=2, theta=0.5)
    # gradient is (0.4, 0.4, 0.4) at {0, 1}
    c = np.array([0.0, 0.0, 2.4])
    x = indicator(3, [0, 1])
    assert certify_vertex(matrix, c, x, params).is_strict_saddle
    swap, gain = saddle_escape(matrix, c, x, params)
    assert swap.i == 2 and swap.j in (0, 1)
    assert gain == pytest.approx(1.0 + matrix.similarity(2, swap.j), abs=1e-12)
    lhs, rhs = swap_taylor_check(matrix, c, x, swap, params)
    assert lhs == pytest.approx(gain, abs=1e-7)
    assert rhs == pytest.approx(gain, abs=1e-7)


@pytest.mark.parametrize('seed', range(20))
def test_zero_gap_vertices_admit_the_closed_form_swap(seed):
    rng = np.random.default_rng(300 + seed)
    n, k = 8, 3
    matrix, c = random_instance(rng, n, 4, clusters=2)
    theta = float(rng.uniform(0.1, 0.9))
    params = SelectParams(k=k, theta=theta)
    vertex = sorted(rng.choice(n, size=k, replace=False).tolist())
    x = indicator(n, vertex)
    w = matrix.values @ matrix.values.T
    grad = theta * (k - 1) * c + 2 * (1 - theta) * (2.0 * x - w @ x)
    selected, unselected = x > 0.5, x < 0.5
    i = int(np.flatnonzero(unselected)[np.argmax(grad[unselected])])
    # move c_i until g_i ties the worst selected entry; push every other unselected
    # entry half a unit below it, so i is the unique unselected argmax
    c = c.copy()
    floor = grad[selected].min()
    scale = theta * (k - 1)
    for j in np.flatnonzero(unselected):
        target = floor if j == i else floor - 0.5
        c[j] += (target - grad[j]) / scale

    assert certify_vertex(matrix, c, x, params).is_strict_saddle
    swap, gain = saddle_escape(matrix, c, x, params)
    assert swap.i == i
    assert gain == pytest.approx(2 * (1 - theta) * (2.0 - 1.0 + w[swap.i, swap.j]), abs=1e-8)
    lhs, rhs = swap_taylor_check(matrix, c, x, swap, params)
    assert lhs == pytest.approx(gain, abs=1e-8)
    assert rhs == pytest.approx(gain, abs=1e-8)


def test_neighborhood_check_detects_non_maximum(rng):
    matrix, c = random_instance(rng, 8, 3)
    params = SelectParams(k=2, theta=1.0)
    worst = linalg.topk_indices(-c, 2)
    assert not neighborhood_is_local_max(matrix, c, indicator(8, worst), params)
    best = linalg.topk_indices(c, 2)
    assert neighborhood_is_local_max(matrix, c, indicator(8, best), params)


def test_grid_argmax_is_a_vertex_at_lambda_two():
    rng = np.random.default_rng(41)
    for _ in range(15):
        n = int(rng.integers(4, 7))
        k = int(rng.integers(2, n))
        matrix, c = random_instance(rng, n, 3, clusters=2)
        params = SelectParams(k=k, theta=float(rng.uniform(0.1, 0.9)))
        value, point = relaxed_grid_max(matrix, c, params, step=0.25)
        assert set(np.unique(point).tolist()) <= {0.0, 1.0}
        exact = brute_force_ccbqp(matrix, c, params, find_local_maxima=False)
        assert value == pytest.approx(exact.best_value, rel=1e-12, abs=1e-12)
