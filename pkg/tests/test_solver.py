from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kkt_system_beta, ridge_beta
from geifrvfl.dataset import Dataset, normalize, synth_gaussians
from geifrvfl.errors import ConfigError, ConfigMismatch, DimensionMismatch, SingleClass
from geifrvfl.featuremap import hidden_map, init_featuremap
from geifrvfl.solver import (
    VARIANTS,
    TrainConfig,
    TrainedModel,
    decision_score,
    decision_scores,
    fit,
    kkt_residual,
    predict,
    predict_many,
    solve_output_weights,
    training_system,
)

C_GRID = [10.0 ** i for i in range(-5, 6)]
MU_GRID = [2.0 ** i for i in range(-5, 6)]
THETA_GRID = [10.0 ** i for i in range(-5, 5)]


def random_problem(rng, n_max=12, p_max=4, h_max=6):
    n = int(rng.integers(4, n_max + 1))
    n_pos = int(rng.integers(2, n // 2 + 1))
    p = int(rng.integers(1, p_max + 1))
    h = int(rng.integers(1, h_max + 1))
    ds = Dataset("r", rng.random((n, p)), np.r_[np.ones(n_pos), -np.ones(n - n_pos)])
    return ds, init_featuremap(p, h, "relu", int(rng.integers(2 ** 31)))


def random_config(rng, variant):
    theta = float(rng.choice(THETA_GRID)) if variant.startswith("GE") else 0.0
    return TrainConfig(variant, C=float(rng.choice(C_GRID)), theta=theta, mu=float(rng.choice(MU_GRID)))


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig("SVM")
    with pytest.raises(ConfigError):
        TrainConfig("RVFL", C=0.0)
    with pytest.raises(ConfigError):
        TrainConfig("RVFL", theta=-1.0)
    from geifrvfl.graph import GraphSpec
    with pytest.raises(ConfigError):
        TrainConfig("RVFL", graph=GraphSpec("LDA"))
    with pytest.raises(ConfigError):
        TrainConfig("GE_IFRVFL_CIL_1", graph=GraphSpec("LFDA"))
    assert TrainConfig("GE_IFRVFL_CIL_2").graph.kind == "LFDA"
    cfg = TrainConfig("GE_IFRVFL_CIL_1", C=3.0, theta=0.1, mu=0.5)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


def test_balanced_identity_weights_is_ridge():
    rng = np.random.default_rng(0)
    for _ in range(10):
        Z = rng.normal(size=(10, 3))
        y = np.r_[np.ones(5), -np.ones(5)]
        C = float(rng.choice([0.1, 1.0, 10.0]))
        beta = solve_output_weights(Z, y, np.ones(10), 1.0, 1.0, C)
        ref = ridge_beta(Z, y, C)
        assert np.linalg.norm(beta - ref) <= 1e-8 * np.linalg.norm(ref)


@pytest.mark.invariant
def test_label_swap_antisymmetry():
    rng = np.random.default_rng(3)
    Z = rng.normal(size=(9, 5))
    y = np.r_[np.ones(3), -np.ones(6)]
    s = rng.random(9)
    G = rng.normal(size=(5, 5))
    G = G @ G.T
    a = solve_output_weights(Z, y, s, 1.0, 0.5, 10.0, 0.3, G)
    b = solve_output_weights(Z, -y, s, 0.5, 1.0, 10.0, 0.3, G)
    np.testing.assert_allclose(b, -a, atol=1e-10 * np.abs(a).max())


def test_fixed_instance_matches_kkt_system():
    rng = np.random.default_rng(42)
    X = rng.random((8, 2))
    ds = Dataset("k", X, [1, 1, 1, -1, -1, -1, -1, -1])
    fm = init_featuremap(2, 3, seed=1)
    cfg = TrainConfig("GE_IFRVFL_CIL_1", C=10.0, theta=0.1, mu=1.0)
    model = fit(ds, cfg, fm)
    sys_ = training_system(ds, cfg, fm)
    assert not np.allclose(sys_.s, 1.0) and sys_.d_neg < 1
    ref = kkt_system_beta(sys_.Z, sys_.y, sys_.s, sys_.d_pos, sys_.d_neg, cfg.C, cfg.theta, sys_.G)
    assert np.linalg.norm(model.beta - ref) <= 1e-8 * np.linalg.norm(ref)


@pytest.mark.invariant
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(VARIANTS))
def test_kkt_residuals_vanish(seed, variant):
    rng = np.random.default_rng(seed)
    ds, fm = random_problem(rng)
    model = fit(ds, random_config(rng, variant), fm)
    w = kkt_residual(model, ds)
    assert all(r >= 0 for r in w.residuals.values())
    # below 1e-6, or within the error that rounding beta to float64 can cause
    assert w.max_residual < max(1e-6, 4 * w.rounding_floor), (w.residuals, w.rounding_floor)
    assert w.residuals["multiplier_pos"] < 1e-6 and w.residuals["primal_neg"] < 1e-6


def test_perturbed_beta_is_detected():
    rng = np.random.default_rng(5)
    ds, fm = random_problem(rng)
    model = fit(ds, TrainConfig("IFRVFL", C=10.0, mu=1.0), fm)
    beta = model.beta.copy()
    beta[0] += 0.1
    bad = replace(model, beta=beta)
    assert kkt_residual(bad, ds).residuals["stationarity"] > 1e-3


def test_ridge_case_residuals_are_normal_equations():
    rng = np.random.default_rng(8)
    ds = Dataset("b", rng.random((10, 2)), np.r_[np.ones(5), -np.ones(5)])
    fm = init_featuremap(2, 3, seed=0)
    C = 2.0
    model = fit(ds, TrainConfig("RVFL", C=C), fm)
    Z = np.hstack([ds.X, hidden_map(ds.X, fm)])
    normal = Z.T @ (ds.y - Z @ model.beta) * C - model.beta
    w = kkt_residual(model, ds)
    assert abs(w.residuals["stationarity"] - np.abs(normal).max()) < 1e-12
    assert w.max_residual < 1e-10


def test_kkt_residual_config_mismatch():
    rng = np.random.default_rng(1)
    ds, fm = random_problem(rng)
    model = fit(ds, TrainConfig("RVFL"), fm)
    other = Dataset("o", ds.X + 1.0, ds.y)
    with pytest.raises(ConfigMismatch):
        kkt_residual(model, other)


def test_single_class_training():
    with pytest.raises(SingleClass):
        fit(Dataset("s", np.ones((3, 1)), np.ones(3)), TrainConfig("RVFL"), init_featuremap(1, 2))


@pytest.mark.invariant
def test_variant_lattice():
    rng = np.random.default_rng(11)
    ds = normalize(synth_gaussians(6, 14, 3, 1.5, 2))
    fm = init_featuremap(3, 5, seed=4)
    ge = fit(ds, TrainConfig("GE_IFRVFL_CIL_1", C=5.0, theta=0.0, mu=0.5), fm)
    sys_ = training_system(ds, TrainConfig("GE_IFRVFL_CIL_1", C=5.0, theta=0.0, mu=0.5), fm)
    cil = solve_output_weights(sys_.Z, sys_.y, sys_.s, sys_.d_pos, sys_.d_neg, 5.0)
    np.testing.assert_allclose(ge.beta, cil, atol=1e-10)
    rv = fit(ds, TrainConfig("RVFL", C=5.0), fm)
    plain = solve_output_weights(sys_.Z, sys_.y, np.ones(20), 1.0, 1.0, 5.0)
    np.testing.assert_allclose(rv.beta, plain, atol=1e-10)
    elm = fit(ds, TrainConfig("ELM", C=5.0), fm)
    H = hidden_map(ds.X, fm)
    np.testing.assert_allclose(elm.beta, solve_output_weights(H, ds.y, np.ones(20), 1.0, 1.0, 5.0), atol=1e-10)
    assert elm.beta.shape == (5,) and rv.beta.shape == (8,)
    del rng


@pytest.mark.invariant
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(VARIANTS))
def test_shrinks_as_C_decreases(seed, variant):
    rng = np.random.default_rng(seed)
    ds, fm = random_problem(rng)
    theta = 0.5 if variant.startswith("GE") else 0.0
    sys_ = training_system(ds, TrainConfig(variant, C=1.0, theta=theta, mu=1.0), fm)
    B = np.eye(sys_.Z.shape[1]) + (theta * sys_.G if sys_.G is not None else 0)
    norms = []
    for C in [100.0, 10.0, 1.0, 0.1, 0.01]:
        b = fit(ds, TrainConfig(variant, C=C, theta=theta, mu=1.0), fm).beta
        # the penalised quantity is b^T (I + theta G) b; with theta = 0 that is |b|^2
        norms.append(b @ B @ b)
    assert all(later <= earlier * (1 + 1e-8) + 1e-14 for earlier, later in zip(norms, norms[1:]))
    if theta == 0.0:
        e = [np.linalg.norm(fit(ds, TrainConfig(variant, C=C, mu=1.0), fm).beta) for C in [100.0, 10.0, 1.0, 0.1, 0.01]]
        assert all(b <= a * (1 + 1e-8) + 1e-14 for a, b in zip(e, e[1:]))


def test_decision_score_examples():
    fm = init_featuremap(2, 3, seed=0)
    cfg = TrainConfig("RVFL")
    zero = TrainedModel(fm, np.zeros(5), cfg)
    assert decision_score(zero, np.array([0.3, 0.9])) == 0.0
    assert predict(zero, np.array([0.3, 0.9])) == 1
    rng = np.random.default_rng(2)
    m = TrainedModel(fm, rng.normal(size=5), cfg)
    m2 = TrainedModel(fm, 2 * m.beta, cfg)
    x = rng.random(2)
    assert np.isclose(decision_score(m2, x), 2 * decision_score(m, x), rtol=1e-14)
    with pytest.raises(DimensionMismatch):
        decision_score(m, np.ones(3))


def test_predict_sign_rule():
    fm = init_featuremap(1, 1, seed=0)
    W, b = fm.W, fm.b
    # pick beta so the score is a chosen value at x = 0
    h = hidden_map(np.zeros((1, 1)), fm)[0, 0]
    for target, label in ((3.2, 1), (-0.01, -1), (0.0, 1)):
        beta = np.array([0.0, target / h]) if h != 0 else np.array([0.0, 0.0])
        if h == 0 and target != 0:
            continue
        assert predict(TrainedModel(fm, beta, TrainConfig("RVFL")), np.zeros(1)) == label
    del W, b


def test_interpolates_separable_toy():
    X = np.array([[0.0, 0.1], [0.2, 0.0], [0.1, 0.3], [1.0, 0.9], [0.8, 1.0], [0.9, 0.7]])
    y = np.array([1, 1, 1, -1, -1, -1])
    ds = Dataset("sep", X, y)
    model = fit(ds, TrainConfig("RVFL", C=1e8), init_featuremap(2, 4, seed=3))
    assert np.all(np.sign(decision_scores(model, X)) == y)
    np.testing.assert_array_equal(predict_many(model, X), y)


def test_scores_apply_stored_scaling():
    raw = synth_gaussians(8, 16, 2, 2.0, 0)
    train = normalize(raw)
    model = fit(train, TrainConfig("IFRVFL", C=1.0, mu=1.0), init_featuremap(2, 4, seed=0))
    np.testing.assert_allclose(decision_scores(model, raw.X),
                               decision_scores(replace(model, scaling=None), train.X), atol=1e-14)
