"""Classification metrics and rank-based model comparison.

AUC here is balanced accuracy, ``(sensitivity + specificity) / 2``, which
is the convention the benchmark tables use. A score-based ROC AUC is
available separately through :func:`roc_auc` and is reported only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInputs, EmptyClassInTest, NonFinite, UnsupportedD

# two-tailed Nemenyi critical values, q = studentized range / sqrt(2), d = 2..10
Q_TABLE = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920),
}


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other):
        return Confusion(self.tp + other.tp, self.fp + other.fp,
                         self.tn + other.tn, self.fn + other.fn)


@dataclass(frozen=True)
class Metrics:
    sensitivity: float
    specificity: float
    precision: float
    auc: float
    f_measure: float
    g_mean: float
    precision_defined: bool = True


def confusion(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in shape")
    p, pp = y_true > 0, y_pred > 0
    return Confusion(int(np.sum(p & pp)), int(np.sum(~p & pp)),
                     int(np.sum(~p & ~pp)), int(np.sum(p & ~pp)))


def metrics(conf):
    if conf.tp + conf.fn == 0 or conf.tn + conf.fp == 0:
        raise EmptyClassInTest(f"test split lacks a class: {conf}")
    sens = conf.tp / (conf.tp + conf.fn)
    spec = conf.tn / (conf.tn + conf.fp)
    defined = conf.tp + conf.fp > 0
    prec = conf.tp / (conf.tp + conf.fp) if defined else 0.0
    f = 2 * prec * sens / (prec + sens) if prec + sens > 0 else 0.0
    return Metrics(sens, spec, prec, (sens + spec) / 2, f, math.sqrt(sens * spec), defined)


def roc_auc(y_true, scores):
    """Mann-Whitney estimate of the ROC AUC; tied scores count one half."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    pos = y_true > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise EmptyClassInTest("ROC AUC needs both classes")
    r = rankdata(scores)
    return float((r[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


@dataclass(frozen=True)
class RankTable:
    aucs: np.ndarray
    ranks: np.ndarray
    avg_ranks: np.ndarray


def average_ranks(aucs):
    """Rank 1 is the best (highest) AUC in each row; ties share the mean rank."""
    a = np.atleast_2d(np.asarray(aucs, dtype=float))
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 2:
        raise DegenerateInputs(f"need at least one dataset and two models, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("AUC matrix contains NaN or infinite entries")
    ranks = rankdata(-a, axis=1)
    return RankTable(a, ranks, ranks.mean(axis=0))


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    ff: float
    ff_infinite: bool = False


def friedman_chi2(avg_ranks, K):
    R = np.asarray(avg_ranks, dtype=float)
    d = R.size
    if d < 2 or K < 2:
        raise DegenerateInputs(f"Friedman test needs d >= 2 and K >= 2, got d={d}, K={K}")
    return float(12.0 * K / (d * (d + 1)) * (np.sum(R ** 2) - d * (d + 1) ** 2 / 4.0))


def friedman_ff(chi2, d, K):
    """Iman-Davenport correction; returns ``inf`` when the denominator vanishes."""
    denom = K * (d - 1) - chi2
    if denom <= 0:
        return math.inf
    return (K - 1) * chi2 / denom


def friedman(avg_ranks, K):
    chi2 = friedman_chi2(avg_ranks, K)
    ff = friedman_ff(chi2, len(avg_ranks), K)
    return FriedmanResult(chi2, ff, math.isinf(ff))


def nemenyi_cd(d, K, alpha=0.05):
    if alpha not in Q_TABLE:
        raise ValueError(f"alpha must be one of {sorted(Q_TABLE)}, got {alpha}")
    if not 2 <= d <= 10:
        raise UnsupportedD(f"critical values are tabulated for 2 <= d <= 10, got {d}")
    if K < 1:
        raise DegenerateInputs("K must be positive")
    return Q_TABLE[alpha][d - 2] * math.sqrt(d * (d + 1) / (6.0 * K))


@dataclass(frozen=True)
class SignTest:
    significant: bool
    threshold: float
    effective_wins: float


def sign_test(wins, ties, losses, z=1.96):
    K = wins + ties + losses
    if K < 1 or min(wins, ties, losses) < 0:
        raise DegenerateInputs("sign test needs non-negative counts with at least one dataset")
    threshold = K / 2.0 + z * math.sqrt(K) / 2.0
    eff = wins + ties / 2.0
    return SignTest(eff >= threshold, threshold, eff)


def win_tie_loss(a, b, tol=0.0):
    """Per-dataset comparison of score vectors ``a`` against ``b``."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return int(np.sum(diff > tol)), int(np.sum(np.abs(diff) <= tol)), int(np.sum(diff < -tol))
