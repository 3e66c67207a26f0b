"""Binary imbalanced datasets: KEEL/CSV ingestion, scaling, folds and noise.

Labels are a single column in {+1, -1}; +1 is always the minority (or equal)
class. Loaders swap the labels when a file violates this and set
``Dataset.labels_swapped``.
"""
from __future__ import annotations

import csv
import io
import math
import os
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ArityMismatch,
    DatasetError,
    DimensionMismatch,
    MissingHeader,
    NonNumericFeature,
    SingleClass,
    TooFewSamplesPerClass,
    UnknownClassLabel,
)

NOISE_LEVELS = (0.0, 0.05, 0.10, 0.20, 0.30)

_KEEL_LABELS = {"positive": 1, "negative": -1}
_CSV_LABELS = {"positive": 1, "negative": -1, "+1": 1, "-1": -1, "1": 1, "0": -1}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Scaling:
    """Per-feature min-max parameters fitted on a training fold."""

    mins: np.ndarray
    spans: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=float)
        mins = X.min(axis=0)
        return cls(_frozen(mins), _frozen(X.max(axis=0) - mins))

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.mins.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mins.shape[0]} features, got {X.shape[-1]}"
            )
        safe = np.where(self.spans > 0, self.spans, 1.0)
        out = (X - self.mins) / safe
        return np.where(self.spans > 0, out, 0.0)

    def to_dict(self):
        return {"mins": self.mins.tolist(), "spans": self.spans.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(_frozen(d["mins"]), _frozen(d["spans"]))


@dataclass(frozen=True)
class Dataset:
    name: str
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()
    labels_swapped: bool = False
    scaling: Scaling | None = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.array(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ArityMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise UnknownClassLabel("labels must be +1 or -1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ArityMismatch(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_pos(self):
        return int(np.sum(self.y > 0))

    @property
    def n_neg(self):
        return int(np.sum(self.y < 0))

    def subset(self, idx):
        idx = np.asarray(idx)
        return replace(self, X=self.X[idx], y=self.y[idx])


def _minority_positive(name, X, y, feature_names):
    y = np.asarray(y, dtype=float)
    swapped = bool(np.sum(y > 0) > np.sum(y < 0))
    if swapped:
        y = -y
    return Dataset(name, X, y, tuple(feature_names), labels_swapped=swapped)


def _to_float(cell, row_no):
    try:
        v = float(cell)
    except ValueError:
        raise NonNumericFeature(f"row {row_no}: non-numeric value {cell!r}") from None
    if not math.isfinite(v):
        raise NonNumericFeature(f"row {row_no}: non-finite value {cell!r}")
    return v


_ATTR_RE = re.compile(r"@attribute\s+('[^']*'|\S+)\s*(.*)$", re.IGNORECASE)


def parse_keel(text, name=None):
    """Parse the text of a KEEL ``.dat`` file into a :class:`Dataset`."""
    attrs = []  # (name, declared_values or None)
    inputs = outputs = None
    relation = name
    data_rows = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if data_rows is not None:
            data_rows.append(line)
            continue
        low = line.lower()
        if low.startswith("@relation"):
            parts = line.split(None, 1)
            if relation is None and len(parts) == 2:
                relation = parts[1].strip()
        elif low.startswith("@attribute"):
            m = _ATTR_RE.match(line)
            if not m:
                raise MissingHeader(f"malformed attribute line: {line!r}")
            aname, rest = m.group(1).strip("'"), m.group(2).strip()
            values = None
            if rest.startswith("{"):
                values = {v.strip() for v in rest.strip("{}").split(",")}
            attrs.append((aname, values))
        elif low.startswith("@input"):
            inputs = [s.strip() for s in line.split(None, 1)[1].split(",")]
        elif low.startswith("@output"):
            outputs = [s.strip() for s in line.split(None, 1)[1].split(",")]
        elif low.startswith("@data"):
            data_rows = []
    if data_rows is None:
        raise MissingHeader("no @data section")
    if not attrs:
        raise MissingHeader("no @attribute declarations")

    names = [a for a, _ in attrs]
    class_name = outputs[0] if outputs else names[-1]
    if class_name not in names:
        raise MissingHeader(f"output attribute {class_name!r} not declared")
    class_col = names.index(class_name)
    if inputs:
        missing = [n for n in inputs if n not in names]
        if missing:
            raise MissingHeader(f"undeclared inputs: {missing}")
        feat_cols = [names.index(n) for n in inputs]
    else:
        feat_cols = [j for j in range(len(names)) if j != class_col]
    declared = attrs[class_col][1]

    X, y = [], []
    for row_no, line in enumerate(data_rows, start=1):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(attrs):
            raise ArityMismatch(
                f"row {row_no}: {len(cells)} values for {len(attrs)} attributes"
            )
        label = cells[class_col]
        if (declared is not None and label not in declared) or label not in _KEEL_LABELS:
            raise UnknownClassLabel(f"row {row_no}: class value {label!r}")
        y.append(_KEEL_LABELS[label])
        X.append([_to_float(cells[j], row_no) for j in feat_cols])
    X = np.array(X, dtype=float).reshape(len(y), len(feat_cols))
    return _minority_positive(relation or "keel", X, y, [names[j] for j in feat_cols])


def serialize_keel(ds):
    """Inverse of :func:`parse_keel` on the numeric payload."""
    out = io.StringIO()
    out.write(f"@relation {ds.name}\n")
    for j, n in enumerate(ds.feature_names):
        col = ds.X[:, j]
        out.write(f"@attribute {n} real [{float(col.min())!r}, {float(col.max())!r}]\n")
    out.write("@attribute Class {positive, negative}\n")
    out.write(f"@inputs {', '.join(ds.feature_names)}\n")
    out.write("@outputs Class\n@data\n")
    # undo the load-time swap so the file keeps its original class strings
    y = -ds.y if ds.labels_swapped else ds.y
    for row, label in zip(ds.X, y):
        cells = [repr(float(v)) for v in row]
        cells.append("positive" if label > 0 else "negative")
        out.write(", ".join(cells) + "\n")
    return out.getvalue()


def parse_csv(text, name="csv"):
    """Header row, numeric features, class label in the last column."""
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise MissingHeader("empty CSV")
    header = [h.strip() for h in rows[0]]
    X, y = [], []
    for row_no, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ArityMismatch(f"row {row_no}: {len(row)} values for {len(header)} columns")
        label = row[-1].strip().lower()
        if label not in _CSV_LABELS:
            raise UnknownClassLabel(f"row {row_no}: class value {row[-1]!r}")
        y.append(_CSV_LABELS[label])
        X.append([_to_float(c.strip(), row_no) for c in row[:-1]])
    X = np.array(X, dtype=float).reshape(len(y), len(header) - 1)
    return _minority_positive(name, X, y, header[:-1])


def load_dataset(path):
    """Read a ``.dat`` (KEEL) or ``.csv`` file; the dataset is named after the file."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DatasetError(f"dataset file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stem = os.path.splitext(os.path.basename(path))[0]
    if path.lower().endswith(".csv"):
        return parse_csv(text, name=stem)
    return replace(parse_keel(text), name=stem)


def normalize(ds, scaling=None):
    """Min-max scale features to [0, 1].

    With ``scaling=None`` the parameters are fitted on ``ds`` itself; pass the
    training fold's :class:`Scaling` to transform a test fold without leakage.
    """
    if scaling is None:
        scaling = Scaling.fit(ds.X)
    return replace(ds, X=scaling.apply(ds.X), scaling=scaling)


def stratified_kfold(ds, k, seed):
    """Seeded stratified k-fold split returning ``[(train_idx, test_idx), ...]``.

    Each class is shuffled and dealt round-robin over the folds, so per-fold
    class counts differ by at most one.
    """
    y = ds.y if isinstance(ds, Dataset) else np.asarray(ds)
    if k < 2:
        raise TooFewSamplesPerClass("k must be at least 2")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    offset = 0
    for label in (1.0, -1.0):
        idx = np.flatnonzero(y == label)
        if len(idx) < k:
            raise TooFewSamplesPerClass(
                f"class {int(label):+d} has {len(idx)} samples, fewer than k={k}"
            )
        idx = rng.permutation(idx)
        fold_of[idx] = (np.arange(len(idx)) + offset) % k
        offset += len(idx)
    all_idx = np.arange(len(y))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian feature noise.

    ``mode="fraction"`` corrupts ``round(level * N)`` whole samples with
    per-feature noise of the feature's own standard deviation.
    ``mode="amplitude"`` perturbs every sample with ``level`` times that
    standard deviation instead.
    """

    level: float
    seed: int = 0
    mode: str = "fraction"

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"noise level must lie in [0, 1], got {self.level}")
        if self.mode not in ("fraction", "amplitude"):
            raise ValueError(f"unknown noise mode {self.mode!r}")


def inject_noise(ds, spec, feature_std=None):
    if spec.level == 0.0:
        return ds
    rng = np.random.default_rng(spec.seed)
    X = np.array(ds.X, dtype=float)
    std = X.std(axis=0) if feature_std is None else np.asarray(feature_std, dtype=float)
    n = ds.n_samples
    if spec.mode == "fraction":
        n_bad = int(math.floor(spec.level * n + 0.5))
        rows = np.sort(rng.choice(n, size=n_bad, replace=False))
        X[rows] += rng.standard_normal((n_bad, X.shape[1])) * std
    else:
        X += rng.standard_normal(X.shape) * (spec.level * std)
    return replace(ds, X=X)


def synth_gaussians(n_pos, n_neg, p, separation, seed):
    """Two isotropic unit-variance Gaussians centred at +/- separation/2 on every axis."""
    if n_pos < 1 or n_neg < 1:
        raise SingleClass("both classes need at least one sample")
    rng = np.random.default_rng(seed)
    half = separation / 2.0
    X = np.vstack([
        rng.standard_normal((n_pos, p)) + half,
        rng.standard_normal((n_neg, p)) - half,
    ])
    y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
    return _minority_positive(f"synth-{n_pos}-{n_neg}-{p}-{separation:g}", X, y,
                              [f"x{j}" for j in range(p)])


def imbalance_ratio(ds):
    y = ds.y if isinstance(ds, Dataset) else np.asarray(ds)
    n_pos, n_neg = int(np.sum(y > 0)), int(np.sum(y < 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("imbalance ratio needs both classes")
    return max(n_pos, n_neg) / min(n_pos, n_neg)
