"""Cross-validated grid search over (h_l, C, mu, theta).

One pass per (seed, fold) scans the whole grid while sharing work across
cells: IF scores depend only on mu, the LDA regulariser only on h_l, and the
weighted Gram matrix is independent of C. Axes a variant ignores collapse to
a single value (``mu=None`` or ``theta=0``).
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import NoiseSpec, inject_noise, normalize, stratified_kfold
from .errors import NumericalFailure
from .featuremap import init_featuremap
from .fuzzy import IFConfig, class_weights, if_scores
from .graph import GraphSpec, build_embedding
from .solver import (
    GRAPH_OF,
    TrainConfig,
    class_row_weights,
    design_matrix,
    fit,
    predict_many,
    decision_scores,
    ridge_scale,
    solve_gram,
    weighted_gram,
)
from .stats import Confusion, confusion, metrics, roc_auc

log = logging.getLogger(__name__)

METRIC_FIELDS = ("auc", "sensitivity", "specificity", "precision", "f_measure", "g_mean", "roc_auc")


def _axis(values):
    out = tuple(sorted({float(v) for v in values}))
    if not out:
        raise ValueError("grid axes must be non-empty")
    return out


@dataclass(frozen=True)
class GridSpec:
    h_l: tuple = tuple(range(3, 204, 20))
    C: tuple = tuple(10.0 ** i for i in range(-5, 6))
    mu: tuple = tuple(2.0 ** i for i in range(-5, 6))
    theta: tuple = tuple(10.0 ** i for i in range(-5, 5))

    def __post_init__(self):
        h = tuple(sorted({int(v) for v in self.h_l}))
        if not h or h[0] < 1:
            raise ValueError("h_l grid needs positive widths")
        object.__setattr__(self, "h_l", h)
        for name in ("C", "mu", "theta"):
            axis = _axis(getattr(self, name))
            if name != "theta" and axis[0] <= 0:
                raise ValueError(f"{name} grid must be positive")
            if name == "theta" and axis[0] < 0:
                raise ValueError("theta grid must be non-negative")
            object.__setattr__(self, name, axis)

    def for_variant(self, variant):
        """The sub-grid a variant actually searches."""
        uses_mu = variant not in ("RVFL", "ELM")
        return GridSpec(self.h_l, self.C, self.mu if uses_mu else (1.0,),
                        self.theta if variant in GRAPH_OF else (0.0,))

    def to_dict(self):
        return {"h_l": list(self.h_l), "C": list(self.C), "mu": list(self.mu), "theta": list(self.theta)}

    @classmethod
    def from_dict(cls, d):
        base = cls()
        return cls(*(d.get(k, getattr(base, k)) for k in ("h_l", "C", "mu", "theta")))


@dataclass(frozen=True)
class Cell:
    h_l: int
    C: float
    mu: float | None
    theta: float

    def sort_key(self):
        # tie-break order: smaller h_l, then C, then theta, then mu
        return (self.h_l, self.C, self.theta, -1.0 if self.mu is None else self.mu)


@dataclass
class CellResult:
    cell: Cell
    folds: list = field(default_factory=list)  # list of (Confusion, roc_auc)

    def summary(self):
        rows = []
        for conf, roc in self.folds:
            m = metrics(conf)
            rows.append([m.auc, m.sensitivity, m.specificity, m.precision, m.f_measure, m.g_mean, roc])
        a = np.array(rows)
        out = dict(zip(METRIC_FIELDS, a.mean(axis=0)))
        out["auc_std"] = float(a[:, 0].std())
        return out

    @property
    def mean_auc(self):
        return float(np.mean([metrics(c).auc for c, _ in self.folds]))


@dataclass
class GridResult:
    variant: str
    best_config: TrainConfig
    best_h_l: int
    best_auc: float
    table: list  # CellResult, sorted by cell
    nested_auc: float | None = None
    outer_configs: list = field(default_factory=list)

    @property
    def best(self):
        for r in self.table:
            if r.cell == self.best_cell:
                return r
        raise LookupError("best cell missing from table")

    @property
    def best_cell(self):
        c = self.best_config
        return Cell(self.best_h_l, c.C, c.mu if c.variant not in ("RVFL", "ELM") else None, c.theta)


def derived_seed(*keys):
    """Stable 32-bit seed derived from integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def featuremap_seed(seed, h_l):
    return derived_seed(seed, h_l, 1)


def noise_seed(seed, fold, level):
    return derived_seed(seed, fold, round(level * 1_000_000), 2)


def prepare_fold(ds, train_idx, test_idx, noise=None, seed=0, fold=0):
    """Split, corrupt the training part if asked, then min-max scale on training statistics."""
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    if noise is not None and noise.level > 0:
        train = inject_noise(train, NoiseSpec(noise.level, noise_seed(seed, fold, noise.level), noise.mode))
    train = normalize(train)
    test = normalize(test, train.scaling)
    return train, test


def _config(variant, cell):
    return TrainConfig(variant, C=cell.C, theta=cell.theta, mu=1.0 if cell.mu is None else cell.mu)


def scan_fold(train, test, variant, grid, seed, activation="relu"):
    """Evaluate every cell of ``grid`` on one train/test split.

    Returns ``{Cell: (Confusion, roc_auc)}``. Uses the unrefined Cholesky
    solve; selection only needs the sign of test scores.
    """
    g = grid.for_variant(variant)
    uses_mu = variant not in ("RVFL", "ELM")
    kind = GRAPH_OF.get(variant)
    direct = variant != "ELM"
    d_pos, d_neg = class_weights(train.y) if kind else (1.0, 1.0)
    mus = g.mu if uses_mu else (None,)
    scores_by_mu = {mu: (if_scores(train, IFConfig(mu)) if mu is not None else np.ones(train.n_samples))
                    for mu in mus}
    out = {}
    for h in g.h_l:
        fm = init_featuremap(train.n_features, h, activation, featuremap_seed(seed, h))
        Z = design_matrix(train.X, fm, direct)
        Zt = design_matrix(test.X, fm, direct)
        dim = Z.shape[1]
        G_lda = None
        if kind == "LDA" and any(t > 0 for t in g.theta):
            G_lda = build_embedding(Z, train.y, GraphSpec("LDA")).G
        for mu in mus:
            w = class_row_weights(train.y, scores_by_mu[mu], d_pos, d_neg)
            M, r = weighted_gram(Z, train.y, w)
            G = G_lda
            if kind == "LFDA" and any(t > 0 for t in g.theta):
                G = build_embedding(Z, train.y, GraphSpec("LFDA"), sigma=mu).G
            for theta in g.theta:
                B = None if theta == 0 or G is None else np.eye(dim) + theta * G
                betas = []
                for C in g.C:
                    try:
                        betas.append(solve_gram(M, r, ridge_scale(C, d_pos, d_neg), B))
                    except NumericalFailure as exc:
                        raise NumericalFailure(f"{variant} cell h_l={h} C={C:g} mu={mu} theta={theta:g}: {exc}") from exc
                S = Zt @ np.column_stack(betas)
                for j, C in enumerate(g.C):
                    sc = S[:, j]
                    pred = np.where(sc >= 0, 1, -1)
                    out[Cell(h, C, mu, theta)] = (confusion(test.y, pred), roc_auc(test.y, sc))
    return out


def _fold_task(args):
    ds, variant, grid, seed, fold, train_idx, test_idx, noise, activation = args
    train, test = prepare_fold(ds, train_idx, test_idx, noise, seed, fold)
    return seed, fold, scan_fold(train, test, variant, grid, seed, activation)


def _select(table):
    best = None
    for r in table:
        auc = r.mean_auc
        if best is None or auc > best[0] + 1e-12:
            best = (auc, r)
    return best


def _as_seeds(seed):
    return [int(s) for s in np.atleast_1d(seed)]


def grid_search(ds, variant, grids=None, k=5, seed=0, noise=None, nested=False, jobs=1,
                activation="relu"):
    """Exhaustive k-fold grid search for one variant.

    ``seed`` may be a list; the table then pools folds of every seed. Cells
    are ranked by mean balanced-accuracy AUC, ties going to the smaller
    h_l, C, theta and mu in that order. With ``nested=True`` every outer
    fold runs its own inner search on its training part and the reported
    ``nested_auc`` comes from the untouched outer test folds.
    """
    grids = GridSpec() if grids is None else grids
    seeds = _as_seeds(seed)
    tasks = []
    for s in seeds:
        for f, (tr, te) in enumerate(stratified_kfold(ds, k, s)):
            tasks.append((ds, variant, grids, s, f, tr, te, noise, activation))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_fold_task, tasks))
    else:
        parts = [_fold_task(t) for t in tasks]
    parts.sort(key=lambda p: (p[0], p[1]))

    cells = {}
    for s, f, res in parts:
        log.debug("%s seed=%d fold=%d: %d cells", variant, s, f, len(res))
        for cell, val in res.items():
            cells.setdefault(cell, CellResult(cell)).folds.append(val)
    table = sorted(cells.values(), key=lambda r: r.cell.sort_key())
    best_auc, best = _select(table)
    result = GridResult(variant, _config(variant, best.cell), best.cell.h_l, best_auc, table)
    if nested:
        result.nested_auc, result.outer_configs = _nested(ds, variant, grids, k, seeds, noise, activation)
    return result


def _nested(ds, variant, grids, k, seeds, noise, activation):
    aucs, configs = [], []
    for s in seeds:
        for f, (tr, te) in enumerate(stratified_kfold(ds, k, s)):
            train = ds.subset(tr)
            if noise is not None and noise.level > 0:
                train = inject_noise(train, NoiseSpec(noise.level, noise_seed(s, f, noise.level), noise.mode))
            # inner search sees only the outer training part; the model keeps
            # its own scaling, so the outer test rows go in raw
            inner = grid_search(train, variant, grids, k, s, None, False, 1, activation)
            fm = init_featuremap(train.n_features, inner.best_h_l, activation,
                                 featuremap_seed(s, inner.best_h_l))
            model = fit(normalize(train), inner.best_config, fm)
            test = ds.subset(te)
            aucs.append(metrics(confusion(test.y, predict_many(model, test.X))).auc)
            configs.append((inner.best_h_l, inner.best_config))
    return float(np.mean(aucs)), configs


def evaluate_model(model, ds):
    """Metrics of a trained model on a labelled dataset."""
    scores = decision_scores(model, ds.X)
    m = metrics(confusion(ds.y, np.where(scores >= 0, 1, -1)))
    return m, roc_auc(ds.y, scores)


__all__ = [
    "Cell", "CellResult", "Confusion", "GridResult", "GridSpec", "METRIC_FIELDS",
    "derived_seed", "evaluate_model", "featuremap_seed", "grid_search", "noise_seed",
    "prepare_fold", "scan_fold",
]
