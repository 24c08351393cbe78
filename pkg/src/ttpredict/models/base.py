"""The classifier contract shared by all model families."""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, ClassVar, Dict, Tuple, Type

import numpy as np
from pydantic import BaseModel, ConfigDict

from ttpredict.errors import DegenerateFitError, DomainError

__all__ = [
    "ModelFamily",
    "Params",
    "Classifier",
    "check_training_data",
    "check_features",
    "sigmoid",
]


class ModelFamily(Enum):
    """Classifier families."""

    logreg = "logreg"
    forest = "forest"
    svm = "svm"
    mlp = "mlp"
    baseline = "baseline"
    """Majority-class or constant predictor, the reference every model should beat."""


class Params(BaseModel):
    """Base class of hyperparameter records."""

    model_config = ConfigDict(frozen=True, extra="forbid")


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def check_features(x: Any) -> np.ndarray:
    matrix = np.asarray(x, dtype=float)
    if matrix.ndim != 2:
        raise DomainError(f"expected a two-dimensional feature matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("feature matrix contains non-finite entries")
    return matrix


def check_training_data(x: Any, y: Any) -> Tuple[np.ndarray, np.ndarray]:
    """
    Validate a training set.

    :param x: n x d feature matrix
    :param y: labels in {-1, +1}
    :return: float matrix and integer labels
    :raises DomainError: on shape mismatch, non-finite entries or foreign labels
    :raises DegenerateFitError: if only one class is present
    """
    matrix = check_features(x)
    labels = np.asarray(y)
    if labels.ndim != 1 or len(labels) != matrix.shape[0]:
        raise DomainError(f"{matrix.shape[0]} rows but label shape {labels.shape}")
    if not np.all(np.isin(labels, (-1, 1))):
        raise DomainError("labels must be -1 or +1")
    labels = labels.astype(int)
    if len(np.unique(labels)) < 2:
        raise DegenerateFitError(f"training labels contain a single class ({labels[0]:+d})")
    return matrix, labels


class Classifier(ABC):
    """
    A fitted binary classifier.

    Scores are monotone in the confidence that the label is +1. The label is +1 iff the score
    is strictly above :attr:`threshold`; a tie goes to -1.
    """

    family: ClassVar[ModelFamily]
    params_class: ClassVar[Type[Params]]
    threshold: ClassVar[float] = 0.5

    def __init__(self, params: Params, seed: int, n_features: int):
        self.params = params
        self.seed = seed
        self.n_features = n_features

    @abstractmethod
    def _scores(self, x: np.ndarray) -> np.ndarray:
        """Scores of the rows of a validated matrix."""

    @abstractmethod
    def parameters_to_dict(self) -> Dict[str, Any]:
        """Fitted parameters as JSON-compatible data."""

    @classmethod
    @abstractmethod
    def from_parameters(
        cls, params: Params, seed: int, n_features: int, parameters: Dict[str, Any]
    ) -> "Classifier":
        """Rebuild a classifier from :meth:`parameters_to_dict` output."""

    def predict_many(self, x: Any) -> Tuple[np.ndarray, np.ndarray]:
        """
        Score and label the rows of a matrix.

        :param x: n x d matrix with the training dimension
        :return: (scores, labels in {-1, +1})
        """
        matrix = check_features(x)
        if matrix.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {matrix.shape[1]}")
        scores = self._scores(matrix)
        labels = np.where(scores > self.threshold, 1, -1)
        return scores, labels

    def predict(self, x: Any) -> Tuple[float, int]:
        """
        Score and label one feature vector.

        :param x: vector with the training dimension
        :return: (score, label)
        """
        vector = np.asarray(x, dtype=float)
        if vector.ndim != 1:
            raise DomainError(f"expected a feature vector, got shape {vector.shape}")
        scores, labels = self.predict_many(vector[np.newaxis, :])
        return float(scores[0]), int(labels[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "params": self.params.model_dump(mode="json"),
            "seed": self.seed,
            "n_features": self.n_features,
            "parameters": self.parameters_to_dict(),
        }
