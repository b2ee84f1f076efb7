import numpy as np
import pytest

from dksel import linalg
from dksel.errors import InfeasibleSwapError, StaleCacheError, TooLargeError
from dksel.models import SelectParams, SwapDirection
from dksel.objective import (directional_quadratic, eval_gradient, eval_objective, score_selection,
                             swap_curvature, swap_taylor_check)
from dksel.pool import validate_pool

from helpers import dense_gram, dense_objective, indicator, naive_topk, random_feasible, random_instance


def test_theta_one_objective_is_linear():
    matrix = validate_pool(np.eye(4, dtype=np.float32))
    c = np.array([1.0, 0.5, 0.0, 0.0])
    params = SelectParams(k=2, theta=1.0)
    assert eval_objective(matrix, c, indicator(4, [0, 1]), params) == pytest.approx(1.5)


def test_theta_zero_orthogonal_pair(orthonormal_pool):
    params = SelectParams(k=2, theta=0.0, lam=2.0)
    c = np.zeros(4)
    assert eval_objective(orthonormal_pool, c, indicator(4, [0, 2]), params) == pytest.approx(2.0)


def test_objective_matches_dense_oracle(rng):
    matrix, c = random_instance(rng, 6, 3)
    params = SelectParams(k=3, theta=0.5)
    for _ in range(5):
        x = random_feasible(rng, 6, 3)
        expected = dense_objective(matrix, c, x, 3, 0.5, 2.0)
        assert eval_objective(matrix, c, x, params) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_score_selection_agrees_with_eval_objective(rng):
    matrix, c = random_instance(rng, 20, 5)
    params = SelectParams(k=4, theta=0.3)
    selected = [1, 7, 9, 15]
    assert score_selection(matrix, c, selected, params) == pytest.approx(
        eval_objective(matrix, c, indicator(20, selected), params), rel=1e-12)


def test_gradient_theta_one_is_scaled_relevance(rng):
    matrix, c = random_instance(rng, 8, 3)
    params = SelectParams(k=3, theta=1.0)
    x = random_feasible(rng, 8, 3)
    grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
    np.testing.assert_array_equal(grad, 2 * c)


def test_gradient_vanishes_at_origin_for_theta_zero(rng):
    matrix, c = random_instance(rng, 8, 3)
    grad = eval_gradient(matrix, c, np.zeros(8), np.zeros(3), SelectParams(k=3, theta=0.0))
    np.testing.assert_array_equal(grad, np.zeros(8))


@pytest.mark.parametrize('seed', range(20))
def test_gradient_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 65))
    k = int(rng.integers(1, min(n, 8) + 1))
    theta = float(rng.uniform(0, 1))
    matrix, c = random_instance(rng, n, 6)
    params = SelectParams(k=k, theta=theta)
    x = random_feasible(rng, n, k)
    grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
    h = 1e-4
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        numeric = (eval_objective(matrix, c, x + e, params) - eval_objective(matrix, c, x - e, params)) / (2 * h)
        assert numeric == pytest.approx(grad[i], rel=1e-5, abs=1e-7)


def test_stale_cache_is_detected(rng):
    matrix, c = random_instance(rng, 10, 4)
    x = random_feasible(rng, 10, 3)
    v = linalg.rmatvec(matrix, x)
    eval_gradient(matrix, c, x, v, SelectParams(k=3), verify_cache=True)
    with pytest.raises(StaleCacheError):
        eval_gradient(matrix, c, x, v + 1e-2, SelectParams(k=3), verify_cache=True)


def test_curvature_vanishes_at_theta_one(rng):
    matrix, c = random_instance(rng, 8, 3)
    x = random_feasible(rng, 8, 2)
    direction = indicator(8, [0, 1]) - x
    params = SelectParams(k=2, theta=1.0)
    grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
    assert directional_quadratic(matrix, x, grad, direction, params).curvature == 0.0


def test_swap_direction_curvature_is_twice_the_swap_gain(rng):
    matrix, c = random_instance(rng, 8, 4)
    params = SelectParams(k=3, theta=0.4)
    x = random_feasible(rng, 8, 3)
    grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
    for _ in range(10):
        i, j = rng.choice(8, size=2, replace=False)
        direction = SwapDirection(int(i), int(j), 1.0).vector(8)
        dq = directional_quadratic(matrix, x, grad, direction, params)
        assert dq.curvature == pytest.approx(2 * swap_curvature(matrix, i, j, params), rel=1e-12)


def test_curvature_matches_dense_hessian(rng):
    matrix, c = random_instance(rng, 8, 3)
    params = SelectParams(k=3, theta=0.6)
    x = random_feasible(rng, 8, 3)
    s = indicator(8, [1, 4, 6])
    direction = s - x
    hessian = 2 * (1 - 0.6) * (2.0 * np.eye(8) - dense_gram(matrix))
    grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
    dense = directional_quadratic(matrix, x, grad, direction, params, c=c)
    sparse = directional_quadratic(matrix, x, grad, direction, params, v=linalg.rmatvec(matrix, x),
                                   support=[1, 4, 6])
    assert dense.curvature == pytest.approx(float(direction @ hessian @ direction), rel=1e-10)
    assert sparse.curvature == pytest.approx(dense.curvature, rel=1e-10)
    assert dense.delta == pytest.approx(float(grad @ direction))
    assert dense.value_at(0.3) == pytest.approx(eval_objective(matrix, c, x + 0.3 * direction, params), rel=1e-10)


def test_swap_taylor_zero_step(rng):
    matrix, c = random_instance(rng, 6, 3)
    x = random_feasible(rng, 6, 2)
    lhs, rhs = swap_taylor_check(matrix, c, x, SwapDirection(0, 1, 0.0), SelectParams(k=2))
    assert lhs == 0.0 and rhs == 0.0


def test_swap_taylor_theta_one_is_linear(rng):
    matrix, c = random_instance(rng, 6, 3)
    x = indicator(6, [1, 2])
    lhs, rhs = swap_taylor_check(matrix, c, x, SwapDirection(0, 1, 0.5), SelectParams(k=2, theta=1.0))
    expected = 0.5 * (2 - 1) * (c[0] - c[1])
    assert lhs == pytest.approx(expected, abs=1e-12)
    assert rhs == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('seed', range(10))
def test_swap_taylor_identity_on_fractional_points(seed):
    rng = np.random.default_rng(100 + seed)
    matrix, c = random_instance(rng, 10, 4)
    params = SelectParams(k=3, theta=float(rng.uniform(0, 1)))
    x = random_feasible(rng, 10, 3)
    i, j = (int(t) for t in rng.choice(10, size=2, replace=False))
    step = float(rng.uniform(0, min(1 - x[i], x[j])))
    lhs, rhs = swap_taylor_check(matrix, c, x, SwapDirection(i, j, step), params)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


def test_swap_taylor_rejects_infeasible_swaps(rng):
    matrix, c = random_instance(rng, 6, 3)
    x = indicator(6, [0, 1])
    params = SelectParams(k=2)
    with pytest.raises(InfeasibleSwapError):
        swap_taylor_check(matrix, c, x, SwapDirection(2, 2, 0.1), params)
    with pytest.raises(InfeasibleSwapError):
        swap_taylor_check(matrix, c, x, SwapDirection(0, 2, 0.5), params)
    with pytest.raises(InfeasibleSwapError):
        swap_taylor_check(matrix, c, x, SwapDirection(2, 0, -0.5), params)


@pytest.mark.parametrize('values,k,expected', [
    ([3.0, 1.0, 2.0], 2, [0, 2]),
    ([1.0, 1.0, 1.0, 0.0], 2, [0, 1]),
    ([0.0, 5.0, 5.0, 5.0], 1, [1]),
    ([2.0, 2.0], 2, [0, 1]),
])
def test_topk_indices_tie_rule(values, k, expected):
    assert linalg.topk_indices(np.array(values), k).tolist() == expected


def test_topk_indices_matches_full_sort(rng):
    values = np.round(rng.standard_normal(1000), 1)
    assert linalg.topk_indices(values, 50).tolist() == naive_topk(values.tolist(), 50)


def test_ranked_indices_order():
    assert linalg.ranked_indices(np.array([0.5, 0.9, 0.5, 0.1])).tolist() == [1, 0, 2, 3]


def test_gather_sum_is_order_independent(rng):
    matrix, _ = random_instance(rng, 10, 4)
    np.testing.assert_array_equal(linalg.gather_sum(matrix, [7, 2, 5]), linalg.gather_sum(matrix, [2, 5, 7]))


def test_dense_gram_guard(rng):
    matrix, _ = random_instance(rng, 10, 4)
    with pytest.raises(TooLargeError):
        linalg.dense_gram(matrix, max_n=5)


def test_relevance_and_diversity_terms_share_a_scale(rng):
    for _ in range(200):
        n = int(rng.integers(4, 30))
        k = int(rng.integers(2, n + 1))
        matrix, c = random_instance(rng, n, 5)
        selected = rng.choice(n, size=k, replace=False)
        x = indicator(n, selected)
        w = dense_gram(matrix)
        assert abs((k - 1) * float(c @ x)) <= (k - 1) * k + 1e-9
        assert abs(float(x @ (np.eye(n) - w) @ x)) <= (k - 1) * k + 1e-9


def test_swaps_toward_the_larger_gradient_ascend_at_lambda_two(rng):
    steps = 0
    for _ in range(200):
        n = int(rng.integers(4, 12))
        k = int(rng.integers(2, n))
        matrix, c = random_instance(rng, n, 4, clusters=2)
        params = SelectParams(k=k, theta=float(rng.uniform(0.0, 0.95)), lam=2.0)
        x = random_feasible(rng, n, k)
        grad = eval_gradient(matrix, c, x, linalg.rmatvec(matrix, x), params)
        a, b = rng.choice(n, size=2, replace=False)
        i, j = (a, b) if grad[a] >= grad[b] else (b, a)
        step = min(1.0 - x[i], x[j])
        if step <= 0:
            continue
        moved = x.copy()
        moved[i] += step
        moved[j] -= step
        before = eval_objective(matrix, c, x, params)
        after = eval_objective(matrix, c, moved, params)
        scale = max(1.0, abs(before))
        assert after >= before + step * (grad[i] - grad[j]) - 1e-10 * scale
        assert after >= before - 1e-10 * scale
        steps += 1
    assert steps >= 150
