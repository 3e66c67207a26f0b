"""JSON model files.

Floats are written with ``repr`` precision by the json module, so a save and
load round trip reproduces every weight bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import Scaling
from .errors import ModelFormatError
from .featuremap import FeatureMapParams
from .solver import TrainConfig, TrainedModel

FORMAT = "geifrvfl-model"
VERSION = 1


def model_to_dict(model):
    return {
        "format": FORMAT,
        "version": VERSION,
        "config": model.config.to_dict(),
        "featuremap": model.fm.to_dict(),
        "beta": model.beta.tolist(),
        "scaling": None if model.scaling is None else model.scaling.to_dict(),
        "train_digest": model.train_digest,
    }


def model_from_dict(d):
    if not isinstance(d, dict) or d.get("format") != FORMAT:
        raise ModelFormatError("not a model file")
    if d.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model file version {d.get('version')!r}")
    try:
        fm = FeatureMapParams.from_dict(d["featuremap"])
        cfg = TrainConfig.from_dict(d["config"])
        scaling = None if d.get("scaling") is None else Scaling.from_dict(d["scaling"])
        beta = np.array(d["beta"], dtype=float)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    expected = fm.n_hidden + (fm.n_inputs if cfg.direct_links else 0)
    if beta.shape != (expected,):
        raise ModelFormatError(f"beta has shape {beta.shape}, feature map implies ({expected},)")
    if scaling is not None and scaling.mins.shape != (fm.n_inputs,):
        raise ModelFormatError("scaling width does not match the feature map")
    return TrainedModel(fm, beta, cfg, scaling, d.get("train_digest", ""))


def dumps(model):
    return json.dumps(model_to_dict(model), indent=1, allow_nan=False)


def loads(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(d)


def save_model(model, path):
    Path(path).write_text(dumps(model) + "\n")


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return loads(text)
