"""Intuitionistic-fuzzy sample scores and class-imbalance weights.

Membership measures how close a sample sits to its own class centre in the
Gaussian-kernel feature space; non-membership is driven by the share of
opposite-class samples in its kernel neighbourhood. The combined score
down-weights outliers (low membership) and samples buried in the other
class (high non-membership).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyClass, NonPositiveMu, PositiveNotMinority, SingleClass


@dataclass(frozen=True)
class IFConfig:
    mu: float
    alpha: float | None = None  # None: median pairwise kernel distance
    delta: float = 1e-4

    def __post_init__(self):
        if not self.mu > 0:
            raise NonPositiveMu(f"kernel width must be positive, got {self.mu}")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError(f"neighbourhood radius must be positive, got {self.alpha}")
        if not self.delta > 0:
            raise ValueError(f"radius slack must be positive, got {self.delta}")


@dataclass(frozen=True)
class SampleWeighting:
    scores: np.ndarray
    d_pos: float
    d_neg: float


def gaussian_kernel(x1, x2, mu):
    if not mu > 0:
        raise NonPositiveMu(f"kernel width must be positive, got {mu}")
    diff = np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)
    return float(np.exp(-np.dot(diff, diff) / mu ** 2))


def kernel_matrix(X, mu, Y=None):
    if not mu > 0:
        raise NonPositiveMu(f"kernel width must be positive, got {mu}")
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    return np.exp(-cdist(X, Y, "sqeuclidean") / mu ** 2)


def kernel_distance_to_center(i, same_class, K):
    """Feature-space distance from sample ``i`` to the mean of ``same_class``."""
    idx = np.asarray(same_class, dtype=int)
    m = idx.size
    if m == 0:
        raise EmptyClass("class index set is empty")
    sq = K[i, i] - 2.0 * K[i, idx].sum() / m + K[np.ix_(idx, idx)].sum() / m ** 2
    return float(np.sqrt(max(sq, 0.0)))


def _center_distances(K, mask):
    """Vectorised ``kernel_distance_to_center`` for every member of ``mask``."""
    m = mask.sum()
    Kc = K[np.ix_(mask, mask)]
    sq = np.diag(Kc) - 2.0 * Kc.sum(axis=1) / m + Kc.sum() / m ** 2
    return np.sqrt(np.maximum(sq, 0.0))


def default_alpha(K):
    """Median pairwise kernel distance ``sqrt(2 - 2K)`` over distinct pairs."""
    n = K.shape[0]
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, k=1)
    return float(np.median(np.sqrt(np.maximum(2.0 - 2.0 * K[iu], 0.0))))


def if_memberships(X, y, cfg):
    """Return ``(membership, non_membership)`` arrays for the training set."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    pos, neg = y > 0, y < 0
    if not pos.any() or not neg.any():
        raise SingleClass("IF scores need both classes")
    K = kernel_matrix(X, cfg.mu)
    alpha = default_alpha(K) if cfg.alpha is None else cfg.alpha

    membership = np.empty(len(y))
    for mask in (pos, neg):
        dist = _center_distances(K, mask)
        membership[mask] = 1.0 - dist / (dist.max() + cfg.delta)

    # kernel distance <= alpha  <=>  K >= 1 - alpha^2 / 2; the sample itself is counted
    near = K >= 1.0 - 0.5 * alpha ** 2
    np.fill_diagonal(near, True)
    n_near = near.sum(axis=1)
    n_opposite = np.where(pos, near[:, neg].sum(axis=1), near[:, pos].sum(axis=1))
    rho = np.divide(n_opposite, n_near, out=np.zeros(len(y)), where=n_near > 0)
    return membership, (1.0 - membership) * rho


def combine_scores(membership, non_membership):
    mu, nu = np.asarray(membership, dtype=float), np.asarray(non_membership, dtype=float)
    denom = 2.0 - mu - nu
    mixed = np.divide(1.0 - nu, denom, out=np.zeros_like(mu), where=denom > 0)
    return np.where(nu == 0, mu, np.where(mu <= nu, 0.0, mixed))


def if_scores(ds, cfg):
    """IF score in [0, 1] for every training sample of ``ds``."""
    return combine_scores(*if_memberships(ds.X, ds.y, cfg))


def class_weights(y):
    """Minority (+1) samples weigh 1; majority weight shrinks to ``l_p / l_n``."""
    y = np.asarray(y)
    l_p, l_n = int(np.sum(y > 0)), int(np.sum(y < 0))
    if l_p == 0 or l_n == 0:
        raise SingleClass("class weights need both classes")
    if l_p > l_n:
        raise PositiveNotMinority(f"{l_p} positives outnumber {l_n} negatives")
    return 1.0, l_p / l_n
