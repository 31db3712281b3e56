"""Gradient-boosted trees with a compiled split-search kernel and a numpy fallback."""
from ._backend import BACKEND
from .gbm import (
    GbmModel,
    TrainConfig,
    Tree,
    fit_gbm,
    logistic_loss,
    predict_prob,
    predict_score,
    predict_scores,
)

__all__ = [
    "BACKEND",
    "GbmModel",
    "TrainConfig",
    "Tree",
    "fit_gbm",
    "logistic_loss",
    "predict_prob",
    "predict_score",
    "predict_scores",
]
