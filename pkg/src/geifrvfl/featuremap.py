"""Frozen random hidden layer and the enhanced feature matrix ``[X H]``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch, InvalidWidth

ACTIVATIONS = {
    "relu": lambda a: np.maximum(a, 0.0),
    "sigmoid": expit,
    "tanh": np.tanh,
}


@dataclass(frozen=True)
class FeatureMapParams:
    W: np.ndarray  # (p, h_l), uniform on [-1, 1]
    b: np.ndarray  # (h_l,)
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        b = np.array(self.b, dtype=float).ravel()
        if W.ndim != 2 or W.shape[1] != b.shape[0]:
            raise DimensionMismatch(f"W {W.shape} incompatible with b {b.shape}")
        if W.shape[1] < 1:
            raise InvalidWidth("hidden width must be at least 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n_inputs(self):
        return self.W.shape[0]

    @property
    def n_hidden(self):
        return self.W.shape[1]

    def to_dict(self):
        return {
            "seed": int(self.seed),
            "p": self.n_inputs,
            "h_l": self.n_hidden,
            "activation": self.activation,
            "W": self.W.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        fm = cls(np.array(d["W"], dtype=float).reshape(d["p"], d["h_l"]),
                 np.array(d["b"], dtype=float), d["activation"], int(d["seed"]))
        return fm


def init_featuremap(p, h_l, activation="relu", seed=0):
    if p < 1:
        raise DimensionMismatch("need at least one input feature")
    if h_l < 1:
        raise InvalidWidth(f"hidden width must be at least 1, got {h_l}")
    rng = np.random.default_rng(seed)
    W = rng.uniform(-1.0, 1.0, size=(p, h_l))
    b = rng.uniform(-1.0, 1.0, size=h_l)
    return FeatureMapParams(W, b, activation, seed)


def hidden_map(X, fm):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != fm.n_inputs:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, feature map expects {fm.n_inputs}")
    return ACTIVATIONS[fm.activation](X @ fm.W + fm.b)


def enhance(X, H):
    """Concatenate direct links and hidden features: ``Z = [X H]``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if X.shape[0] != H.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, H has {H.shape[0]}")
    return np.hstack([X, H])
