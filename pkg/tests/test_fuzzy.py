import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import if_scores_bruteforce
from geifrvfl.dataset import Dataset
from geifrvfl.errors import EmptyClass, NonPositiveMu, PositiveNotMinority, SingleClass
from geifrvfl.fuzzy import (
    IFConfig,
    class_weights,
    combine_scores,
    gaussian_kernel,
    if_memberships,
    if_scores,
    kernel_distance_to_center,
    kernel_matrix,
)


def test_kernel_values():
    a = np.array([0.3, -1.0])
    assert gaussian_kernel(a, a, 0.7) == 1.0
    assert math.isclose(gaussian_kernel([0.0, 0.0], [0.6, 0.8], 1.0), math.exp(-1), rel_tol=1e-15)
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=3), rng.normal(size=3)
    assert gaussian_kernel(u, v, 2.0) == gaussian_kernel(v, u, 2.0)
    with pytest.raises(NonPositiveMu):
        gaussian_kernel(u, v, 0.0)
    with pytest.raises(NonPositiveMu):
        IFConfig(mu=-1.0)


def test_center_distance_cases():
    K = kernel_matrix(np.array([[0.0], [0.0], [2.0]]), 1.0)
    assert kernel_distance_to_center(2, [2], K) == 0.0
    assert kernel_distance_to_center(0, [0, 1], K) == 0.0
    assert kernel_distance_to_center(1, [0, 1], K) == 0.0
    with pytest.raises(EmptyClass):
        kernel_distance_to_center(0, [], K)


def test_center_distance_term_by_term():
    K = np.array([[1.0, 0.6, 0.2], [0.6, 1.0, 0.5], [0.2, 0.5, 1.0]])
    cls = [0, 1, 2]
    m = 3
    cross = sum(K[0, j] for j in cls)
    inner = sum(K[j, l] for j in cls for l in cls)
    expected = math.sqrt(K[0, 0] - 2 * cross / m + inner / m ** 2)
    assert math.isclose(kernel_distance_to_center(0, cls, K), expected, rel_tol=1e-14)


def test_isolated_center_sample_scores_one():
    # three identical positives far from the negatives: distance 0, no opposite neighbours
    X = np.array([[0.0], [0.0], [0.0], [5.0], [5.1], [5.2], [5.3]])
    y = np.array([1, 1, 1, -1, -1, -1, -1])
    m, nu = if_memberships(X, y, IFConfig(1.0, alpha=0.5))
    s = combine_scores(m, nu)
    np.testing.assert_array_equal(nu[:3], 0.0)
    np.testing.assert_allclose(s[:3], 1.0)


def test_sample_inside_opposite_class_scores_zero():
    X = np.array([[0.0], [0.05], [-0.05], [0.02], [3.0], [3.1]])
    y = np.array([-1, -1, -1, -1, 1, 1])
    # the negative at 0.0 is fine; add a positive buried among negatives
    X = np.vstack([X, [[0.01]]])
    y = np.append(y, 1)
    m, nu = if_memberships(X, y, IFConfig(1.0, alpha=0.3))
    assert m[-1] <= nu[-1]
    assert combine_scores(m, nu)[-1] == 0.0


def test_six_point_bruteforce():
    X = np.array([[0.0], [0.3], [0.5], [1.4], [1.6], [2.5]])
    y = np.array([1, 1, -1, -1, -1, -1])
    cfg = IFConfig(1.0, alpha=0.8, delta=1e-4)
    m, nu = if_memberships(X, y, cfg)
    ref = if_scores_bruteforce(X, y, 1.0, 0.8, 1e-4)
    np.testing.assert_allclose(m, ref[:, 0], atol=1e-12)
    np.testing.assert_allclose(nu, ref[:, 1], atol=1e-12)
    np.testing.assert_allclose(if_scores(Dataset("six", X, y), cfg), ref[:, 2], atol=1e-12)


@pytest.mark.invariant
@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(2, 10), st.integers(1, 3),
       st.sampled_from([2.0 ** i for i in range(-3, 4)]), st.floats(0.05, 1.4), st.integers(0, 2 ** 32 - 1))
def test_matches_bruteforce_and_bounds(n_pos, n_neg, p, mu, alpha, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n_pos + n_neg, p))
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    m, nu = if_memberships(X, y, IFConfig(mu, alpha))
    s = combine_scores(m, nu)
    ref = if_scores_bruteforce(X, y, mu, alpha)
    np.testing.assert_allclose(s, ref[:, 2], atol=1e-10)
    assert np.all(m >= 0) and np.all(m <= 1)
    assert np.all(nu >= 0)
    assert np.all(m + nu <= 1 + 1e-12)
    assert np.all((s >= 0) & (s <= 1))


@pytest.mark.invariant
@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(2, 8), st.sampled_from([0.25, 0.5, 1.0, 2.0]),
       st.floats(0.1, 1.3), st.integers(0, 2 ** 32 - 1))
def test_duplication_and_permutation_invariance(n_pos, n_neg, mu, alpha, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n_pos + n_neg, 2))
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    cfg = IFConfig(mu, alpha)
    s = if_scores(Dataset("d", X, y), cfg)
    s2 = if_scores(Dataset("d", np.vstack([X, X]), np.r_[y, y]), cfg)
    np.testing.assert_allclose(s2[: len(y)], s, atol=1e-12)
    np.testing.assert_allclose(s2[len(y):], s, atol=1e-12)
    perm = rng.permutation(len(y))
    np.testing.assert_allclose(if_scores(Dataset("d", X[perm], y[perm]), cfg), s[perm], atol=1e-12)


@pytest.mark.invariant
@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 50.0), st.integers(0, 2 ** 32 - 1))
def test_feature_scaling_with_matching_width(k, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((9, 2))
    y = np.r_[np.ones(3), -np.ones(6)]
    np.testing.assert_allclose(kernel_matrix(k * X, 0.7 * k), kernel_matrix(X, 0.7), atol=1e-12)
    a = if_scores(Dataset("s", X, y), IFConfig(0.7, alpha=0.6))
    b = if_scores(Dataset("s", k * X, y), IFConfig(0.7 * k, alpha=0.6))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_single_class_rejected():
    with pytest.raises(SingleClass):
        if_memberships(np.zeros((3, 1)), np.ones(3), IFConfig(1.0))


def test_class_weights():
    assert class_weights(np.r_[np.ones(50), -np.ones(50)]) == (1.0, 1.0)
    d_pos, d_neg = class_weights(np.r_[np.ones(5), -np.ones(15)])
    assert d_pos == 1.0 and math.isclose(d_neg, 1 / 3)
    with pytest.raises(SingleClass):
        class_weights(-np.ones(4))
    with pytest.raises(PositiveNotMinority):
        class_weights(np.r_[np.ones(5), -np.ones(2)])


@pytest.mark.invariant
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 40))
def test_majority_weight_range(n_pos, extra):
    d_pos, d_neg = class_weights(np.r_[np.ones(n_pos), -np.ones(n_pos + extra)])
    assert d_pos == 1.0 and 0 < d_neg <= 1
    assert (d_neg == 1.0) == (extra == 0)
