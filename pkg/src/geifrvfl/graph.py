"""Graph-embedding regulariser built from LDA or LFDA similarity graphs.

Both graphs live on the enhanced matrix ``Z``. The intrinsic and penalty
Laplacians give ``G_i = Z^T L Z`` and ``G_p = Z^T U Z``; the regulariser is
``G_p^{-1} G_i`` made symmetric positive semi-definite so that
``beta^T G beta`` is a valid penalty.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    NonPositiveSigma,
    NotSquare,
    NotSymmetric,
    SingleClass,
    SingularPenalty,
)

GRAPH_KINDS = ("LDA", "LFDA")


@dataclass(frozen=True)
class GraphSpec:
    kind: str = "LDA"
    sigma: float | None = None  # LFDA width; None means "use the IF kernel width"
    eps: float = 1e-6

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"graph kind must be one of {GRAPH_KINDS}, got {self.kind!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise NonPositiveSigma(f"sigma must be positive, got {self.sigma}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")


@dataclass(frozen=True)
class GraphPair:
    delta_int: np.ndarray
    delta_pen: np.ndarray


@dataclass(frozen=True)
class EmbedMatrix:
    G: np.ndarray
    spec: GraphSpec
    min_eig_raw: float = 0.0  # smallest eigenvalue of the symmetrised product, before clipping


def _class_sizes(y):
    y = np.asarray(y)
    labels, inverse, counts = np.unique(y, return_inverse=True, return_counts=True)
    if len(labels) < 2:
        raise SingleClass("graph weights need both classes")
    return inverse, counts[inverse].astype(float)


def lda_weights(y):
    inverse, l_c = _class_sizes(y)
    n = len(inverse)
    same = inverse[:, None] == inverse[None, :]
    delta_int = np.where(same, 1.0 / l_c[:, None], 0.0)
    delta_pen = np.where(same, 1.0 / n - 1.0 / l_c[:, None], 1.0 / n)
    return GraphPair(delta_int, delta_pen)


def lfda_affinity(Z, sigma):
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    eta = np.exp(-cdist(Z, Z, "sqeuclidean") / (2.0 * sigma ** 2))
    np.fill_diagonal(eta, 1.0)
    return eta


def lfda_weights(Z, y, sigma):
    inverse, l_c = _class_sizes(y)
    eta = lfda_affinity(np.asarray(Z, dtype=float), sigma)
    n = len(inverse)
    same = inverse[:, None] == inverse[None, :]
    delta_int = np.where(same, eta / l_c[:, None], 0.0)
    delta_pen = np.where(same, eta * (1.0 / n - 1.0 / l_c[:, None]), 1.0 / n)
    return GraphPair(delta_int, delta_pen)


def laplacian(delta):
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise NotSquare(f"similarity matrix must be square, got {delta.shape}")
    if not np.allclose(delta, delta.T, rtol=0.0, atol=1e-10):
        raise NotSymmetric("similarity matrix is not symmetric")
    return np.diag(delta.sum(axis=1)) - delta


def lda_scatter(Z, y):
    """``(G_i, G_p)`` for the LDA graphs in O(N D^2), without N x N matrices.

    The intrinsic Laplacian of the LDA weights is the within-class centring
    operator and the penalty Laplacian is the between-class one, so both
    products reduce to class sums.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y)
    _class_sizes(y)
    n = Z.shape[0]
    total = Z.sum(axis=0)
    G_i = Z.T @ Z
    G_p = -np.outer(total, total) / n
    for label in np.unique(y):
        s = Z[y == label].sum(axis=0)
        outer = np.outer(s, s) / np.sum(y == label)
        G_i -= outer
        G_p += outer
    return G_i, G_p


def embed_from_products(G_i, G_p, spec):
    """Ridge-regularised ``G_p^{-1} G_i``, symmetrised and projected onto the PSD cone."""
    dim = G_p.shape[0]
    ridge = spec.eps * abs(np.trace(G_p)) / dim
    A = G_p + ridge * np.eye(dim)
    A = 0.5 * (A + A.T)
    try:
        try:
            raw = linalg.cho_solve(linalg.cho_factor(A), G_i)
        except linalg.LinAlgError:
            raw = linalg.solve(A, G_i)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularPenalty(f"penalty matrix not invertible (ridge={ridge:g}): {exc}") from exc
    if not np.all(np.isfinite(raw)):
        raise SingularPenalty(f"penalty inversion produced non-finite values (ridge={ridge:g})")
    sym = 0.5 * (raw + raw.T)
    evals, evecs = linalg.eigh(sym)
    G = (evecs * np.maximum(evals, 0.0)) @ evecs.T
    G = 0.5 * (G + G.T)
    return EmbedMatrix(G, spec, float(evals[0]) if evals.size else 0.0)


def embed_matrix(Z, pair, spec):
    Z = np.asarray(Z, dtype=float)
    if Z.shape[0] != pair.delta_int.shape[0]:
        raise DimensionMismatch(f"Z has {Z.shape[0]} rows, graph has {pair.delta_int.shape[0]} nodes")
    L = laplacian(pair.delta_int)
    U = laplacian(pair.delta_pen)
    return embed_from_products(Z.T @ L @ Z, Z.T @ U @ Z, spec)


def _canonical_order(Z, y):
    # G_p is often nearly singular, so summation order alone moves G in the
    # 7th digit; sorting rows first makes G independent of sample order
    keys = np.column_stack([np.asarray(y, dtype=float), Z])[:, ::-1]
    return np.lexsort(keys.T)


def build_embedding(Z, y, spec, sigma=None):
    """Graph construction plus embedding, taking the fast path for LDA."""
    Z = np.asarray(Z, dtype=float)
    order = _canonical_order(Z, y)
    Z, y = Z[order], np.asarray(y)[order]
    if spec.kind == "LDA":
        return embed_from_products(*lda_scatter(Z, y), spec)
    width = spec.sigma if spec.sigma is not None else sigma
    if width is None:
        raise NonPositiveSigma("LFDA needs a sigma")
    return embed_matrix(Z, lfda_weights(Z, y, width), spec)
