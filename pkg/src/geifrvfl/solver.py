"""Closed-form training of the graph-embedded IF-weighted RVFL and its baselines.

All five variants share one weighted ridge system over the enhanced features
``Z`` (``H`` alone for ELM)::

    [k (I + theta G) + Z^T W Z] beta = Z^T W y,     k = 1/l+ + 1/l-

with ``l+ = C d+`` and ``l- = C d-``. ``W`` is diagonal: positives carry
``(1 + l+/l-) s_i`` and negatives ``(1 + l-/l+) s_i`` where ``s`` are the
IF scores. The baselines switch pieces off:

=================  ==========  =========  =========  ============
variant            IF scores   CI weights  graph      direct links
=================  ==========  =========  =========  ============
GE_IFRVFL_CIL_1    yes         yes         LDA        yes
GE_IFRVFL_CIL_2    yes         yes         LFDA       yes
IFRVFL             yes         no          no         yes
RVFL               no          no          no         yes
ELM                no          no          no         no
=================  ==========  =========  =========  ============
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import linalg

from .dataset import Scaling
from .errors import ConfigError, ConfigMismatch, DimensionMismatch, NumericalFailure, SingleClass
from .featuremap import FeatureMapParams, enhance, hidden_map
from .fuzzy import IFConfig, class_weights, if_scores
from .graph import GraphSpec, build_embedding

VARIANTS = ("GE_IFRVFL_CIL_1", "GE_IFRVFL_CIL_2", "IFRVFL", "RVFL", "ELM")
GRAPH_OF = {"GE_IFRVFL_CIL_1": "LDA", "GE_IFRVFL_CIL_2": "LFDA"}


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "GE_IFRVFL_CIL_1"
    C: float = 1.0
    theta: float = 0.0
    mu: float = 1.0
    graph: GraphSpec | None = None
    if_alpha: float | None = None
    if_delta: float = 1e-4

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.C > 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if not self.theta >= 0:
            raise ConfigError(f"theta must be non-negative, got {self.theta}")
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        kind = GRAPH_OF.get(self.variant)
        if kind is None:
            if self.graph is not None:
                raise ConfigError(f"variant {self.variant} takes no graph")
        elif self.graph is None:
            object.__setattr__(self, "graph", GraphSpec(kind))
        elif self.graph.kind != kind:
            raise ConfigError(f"variant {self.variant} needs a {kind} graph, got {self.graph.kind}")

    @property
    def uses_if(self):
        return self.variant != "RVFL" and self.variant != "ELM"

    @property
    def uses_class_weights(self):
        return self.variant in GRAPH_OF

    @property
    def direct_links(self):
        return self.variant != "ELM"

    def if_config(self):
        return IFConfig(self.mu, self.if_alpha, self.if_delta)

    def to_dict(self):
        g = self.graph
        return {
            "variant": self.variant, "C": self.C, "theta": self.theta, "mu": self.mu,
            "graph": None if g is None else {"kind": g.kind, "sigma": g.sigma, "eps": g.eps},
            "if_alpha": self.if_alpha, "if_delta": self.if_delta,
        }

    @classmethod
    def from_dict(cls, d):
        g = d.get("graph")
        return cls(d["variant"], float(d["C"]), float(d["theta"]), float(d["mu"]),
                   None if g is None else GraphSpec(g["kind"], g["sigma"], g["eps"]),
                   d.get("if_alpha"), float(d.get("if_delta", 1e-4)))


@dataclass(frozen=True)
class TrainedModel:
    fm: FeatureMapParams
    beta: np.ndarray
    config: TrainConfig
    scaling: Scaling | None = None
    train_digest: str = field(default="", compare=False)

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).ravel()
        if not np.all(np.isfinite(beta)):
            raise NumericalFailure("output weights are not finite")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class KKTWitness:
    xi_pos: np.ndarray
    xi_neg: np.ndarray
    alpha_pos: np.ndarray
    alpha_neg: np.ndarray
    residuals: dict
    # stationarity error that rounding beta to float64 alone can cause
    rounding_floor: float = 0.0

    @property
    def max_residual(self):
        return max(self.residuals.values())


@dataclass(frozen=True)
class TrainingSystem:
    """Everything the closed form consumes, split out so it can be re-derived."""

    Z: np.ndarray
    y: np.ndarray
    s: np.ndarray
    d_pos: float
    d_neg: float
    G: np.ndarray | None


def data_digest(X, y):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X, dtype=float).tobytes())
    h.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return h.hexdigest()


def design_matrix(X, fm, direct_links=True):
    H = hidden_map(X, fm)
    return enhance(X, H) if direct_links else H


def sample_weighting(ds, cfg):
    """IF scores and class weights for a training set under ``cfg``."""
    if ds.n_pos == 0 or ds.n_neg == 0:
        raise SingleClass("training data needs both classes")
    s = if_scores(ds, cfg.if_config()) if cfg.uses_if else np.ones(ds.n_samples)
    d_pos, d_neg = class_weights(ds.y) if cfg.uses_class_weights else (1.0, 1.0)
    return s, d_pos, d_neg


def training_system(ds, cfg, fm):
    if ds.n_features != fm.n_inputs:
        raise DimensionMismatch(f"data has {ds.n_features} features, feature map expects {fm.n_inputs}")
    Z = design_matrix(ds.X, fm, cfg.direct_links)
    s, d_pos, d_neg = sample_weighting(ds, cfg)
    G = None
    if cfg.graph is not None and cfg.theta > 0:
        G = build_embedding(Z, ds.y, cfg.graph, sigma=cfg.mu).G
    return TrainingSystem(Z, ds.y, s, d_pos, d_neg, G)


def class_row_weights(y, s, d_pos, d_neg):
    """Diagonal of ``W``; independent of C because only l+/l- enters."""
    ratio = d_pos / d_neg  # l+/l-
    return np.where(np.asarray(y) > 0, 1.0 + ratio, 1.0 + 1.0 / ratio) * np.asarray(s, dtype=float)


def weighted_gram(Z, y, w):
    """``(Z^T W Z, Z^T W y)`` for row weights ``w``."""
    Zw = Z * w[:, None]
    return Zw.T @ Z, Zw.T @ y


def ridge_scale(C, d_pos, d_neg):
    return 1.0 / (C * d_pos) + 1.0 / (C * d_neg)


def _cholesky(A):
    try:
        return linalg.cho_factor(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Cholesky factorisation failed: {exc}") from exc


def solve_gram(M, r, k, B=None):
    """Solve ``(k B + M) beta = r`` by Cholesky; ``B=None`` means the identity.

    Plain float64, no refinement: the grid scan uses this directly.
    """
    A = M + (k * np.eye(M.shape[0]) if B is None else k * B)
    return linalg.cho_solve(_cholesky(A), r)


class _PreciseMatvec:
    """``G @ v`` evaluated with 40 significant digits.

    Near the optimum ``beta`` is almost in the null space of ``G``, so the
    product cancels entries of order 1e11 down to O(1); even 80-bit floats
    leave errors near 1e-8 there.
    """

    def __init__(self, G):
        self.rows = [[mpmath.mpf(x) for x in row] for row in np.asarray(G, dtype=float).tolist()]

    def __call__(self, v):
        with mpmath.workdps(40):
            vm = [mpmath.mpf(x) for x in np.asarray(v, dtype=float).tolist()]
            out = [mpmath.fdot(row, vm) for row in self.rows]
            return np.array([np.longdouble(float(x)) + np.longdouble(float(x - float(x))) for x in out])


def solve_output_weights(Z, y, s, d_pos, d_neg, C, theta=0.0, G=None, refine=8):
    """Closed-form output weights for explicit inputs.

    The float64 Cholesky factor is used as a preconditioner for up to
    ``refine`` steps of iterative refinement whose residuals are evaluated in
    extended precision straight from ``Z``, ``W`` and ``G``. ``theta * G`` can
    reach 1e10 and beyond, where unrefined solutions lose most of their digits.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    w = class_row_weights(y, s, d_pos, d_neg)
    if G is not None and theta == 0:
        G = None
    k = ridge_scale(C, d_pos, d_neg)
    M, r = weighted_gram(Z, y, w)
    B = None if G is None else np.eye(M.shape[0]) + theta * G
    A = M + (k * np.eye(M.shape[0]) if B is None else k * B)
    cf = _cholesky(A)
    beta = linalg.cho_solve(cf, r)
    if refine:
        # W and k are rebuilt in extended precision as well: with cond(A) near
        # 1e13 their float64 rounding alone moves beta in the 8th digit
        ld = np.longdouble
        Zl = Z.astype(ld)
        lp, ln = ld(C) * ld(d_pos), ld(C) * ld(d_neg)
        wl = np.where(y > 0, 1 + lp / ln, 1 + ln / lp) * np.asarray(s, dtype=float).astype(ld)
        kl = 1 / lp + 1 / ln
        ktl = kl * ld(theta)
        rhs = Zl.T @ (wl * y.astype(ld))
        Gb = None if G is None else _PreciseMatvec(G)
        for _ in range(refine):
            bl = beta.astype(ld)
            Ab = kl * bl + Zl.T @ (wl * (Zl @ bl))
            if Gb is not None:
                Ab += ktl * Gb(beta)
            res = (rhs - Ab).astype(float)
            if not np.any(res):
                break
            step = linalg.cho_solve(cf, res)
            new = (bl + step.astype(ld)).astype(float)
            if np.array_equal(new, beta):
                break  # the correction is below float64 resolution
            beta = new
    if not np.all(np.isfinite(beta)):
        raise NumericalFailure("output weights are not finite")
    return beta


def fit(ds_train, cfg, fm):
    system = training_system(ds_train, cfg, fm)
    beta = solve_output_weights(system.Z, system.y, system.s, system.d_pos, system.d_neg,
                                cfg.C, cfg.theta, system.G)
    return TrainedModel(fm, beta, cfg, ds_train.scaling, data_digest(ds_train.X, ds_train.y))


def kkt_residual(model, ds_train):
    """Rebuild slacks and multipliers from the optimality conditions and report residuals."""
    if ds_train.n_features != model.fm.n_inputs:
        raise ConfigMismatch("training data does not match the model's input width")
    if model.train_digest and model.train_digest != data_digest(ds_train.X, ds_train.y):
        raise ConfigMismatch("model was trained on different data")
    cfg = model.config
    sys_ = training_system(ds_train, cfg, model.fm)
    if sys_.Z.shape[1] != model.beta.shape[0]:
        raise ConfigMismatch("output weight length does not match the feature map")
    ld = np.longdouble
    y = sys_.y.astype(ld)
    Z = sys_.Z.astype(ld)
    s = sys_.s.astype(ld)
    pos, neg = sys_.y > 0, sys_.y < 0
    Zp, Zn = Z[pos], Z[neg]
    l_pos, l_neg = ld(cfg.C) * ld(sys_.d_pos), ld(cfg.C) * ld(sys_.d_neg)
    beta = model.beta.astype(ld)

    # slacks from primal feasibility, multipliers from the multiplier identities;
    # evaluated in extended precision since theta * G may be huge
    xi_pos = y[pos] - Zp @ beta
    xi_neg = y[neg] - Zn @ beta
    alpha_pos = l_pos * s[pos] * xi_pos
    alpha_neg = l_neg * s[neg] * xi_neg

    reg_beta = beta if sys_.G is None else beta + ld(cfg.theta) * _PreciseMatvec(sys_.G)(model.beta)
    inf = lambda v: float(np.max(np.abs(v))) if v.size else 0.0  # noqa: E731
    residuals = {
        "stationarity": inf(reg_beta - Zp.T @ alpha_pos - Zn.T @ alpha_neg),
        "multiplier_pos": inf(l_pos * s[pos] * xi_pos - alpha_pos),
        "multiplier_neg": inf(l_neg * s[neg] * xi_neg - alpha_neg),
        "primal_pos": inf(Zp @ beta - y[pos] + xi_pos),
        "primal_neg": inf(Zn @ beta - y[neg] + xi_neg),
    }
    absb = np.abs(model.beta)
    lhs = absb if sys_.G is None else absb + cfg.theta * (np.abs(sys_.G) @ absb)
    floor = float(np.finfo(float).eps * np.max(lhs)) if lhs.size else 0.0
    f = lambda v: v.astype(float)  # noqa: E731
    return KKTWitness(f(xi_pos), f(xi_neg), f(alpha_pos), f(alpha_neg), residuals, floor)


def decision_scores(model, X):
    """Scores for raw feature rows; the model's stored scaling is applied first."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.fm.n_inputs:
        raise DimensionMismatch(f"expected {model.fm.n_inputs} features, got {X.shape[1]}")
    if model.scaling is not None:
        X = model.scaling.apply(X)
    return design_matrix(X, model.fm, model.config.direct_links) @ model.beta


def decision_score(model, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("decision_score takes a single feature vector")
    return float(decision_scores(model, x[None, :])[0])


def labels_from_scores(scores):
    # zero goes to the minority class
    return np.where(np.asarray(scores) >= 0, 1, -1)


def predict(model, x):
    return int(labels_from_scores(decision_score(model, x)))


def predict_many(model, X):
    return labels_from_scores(decision_scores(model, X))
