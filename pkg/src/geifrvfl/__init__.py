"""Graph-embedded intuitionistic-fuzzy RVFL classifiers for imbalanced binary data."""

__version__ = "0.1.0"

from .dataset import Dataset, load_dataset, normalize, stratified_kfold, synth_gaussians  # noqa: E402
from .featuremap import FeatureMapParams, init_featuremap  # noqa: E402
from .solver import VARIANTS, TrainConfig, TrainedModel, fit, kkt_residual, predict, predict_many  # noqa: E402

__all__ = [
    "Dataset", "FeatureMapParams", "TrainConfig", "TrainedModel", "VARIANTS",
    "fit", "init_featuremap", "kkt_residual", "load_dataset", "normalize",
    "predict", "predict_many", "stratified_kfold", "synth_gaussians",
]
