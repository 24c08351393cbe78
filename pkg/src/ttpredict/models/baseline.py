"""Constant predictors every real model is compared against."""

from enum import Enum
from typing import Any, Dict, Literal

import numpy as np

from ttpredict.models.base import Classifier, ModelFamily, Params, check_features

__all__ = [
    "Strategy",
    "BaselineParams",
    "BaselineClassifier",
    "baseline_fit",
]


class Strategy(Enum):
    majority = "majority"
    """Score every row with the share of +1 labels seen in training."""

    constant = "constant"
    """Predict a fixed label."""


class BaselineParams(Params):
    strategy: Strategy = Strategy.majority
    constant: Literal[-1, 1] = 1


class BaselineClassifier(Classifier):
    """Scores every row with the same value."""

    family = ModelFamily.baseline
    params_class = BaselineParams

    def __init__(self, params: BaselineParams, seed: int, n_features: int, score: float):
        super().__init__(params, seed, n_features)
        self.score = score

    def _scores(self, x: np.ndarray) -> np.ndarray:
        return np.full(len(x), self.score)

    def parameters_to_dict(self) -> Dict[str, Any]:
        return {"score": self.score}

    @classmethod
    def from_parameters(cls, params, seed, n_features, parameters):
        return cls(params, seed, n_features, float(parameters["score"]))


def baseline_fit(x: Any, y: Any, params: BaselineParams, seed: int = 0) -> BaselineClassifier:
    """
    Fit a constant predictor.

    Unlike the other families a single-class training set is accepted.

    :param x: n x d matrix, only its width is used
    :param y: labels in {-1, +1}
    :param params:
    :param seed: recorded only
    :return: fitted classifier
    """
    matrix = check_features(x)
    labels = np.asarray(y)
    if params.strategy is Strategy.constant:
        score = 1.0 if params.constant == 1 else 0.0
    else:
        score = float(np.mean(labels == 1)) if len(labels) else 0.5
    return BaselineClassifier(params, seed, matrix.shape[1], score)
