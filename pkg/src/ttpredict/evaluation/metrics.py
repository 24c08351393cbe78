"""Confusion matrices, threshold metrics and ROC curves for labels in {-1, +1}."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ttpredict.errors import DomainError

__all__ = [
    "ConfusionMatrix",
    "Metrics",
    "RocCurve",
    "confusion_matrix",
    "compute_metrics",
    "evaluate_predictions",
    "roc_auc",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Prediction counts with +1 as the positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def names(cls) -> List[str]:
        return ["accuracy", "precision", "recall", "f1"]


@dataclass(frozen=True)
class RocCurve:
    points: List[Tuple[float, float]]
    """(false positive rate, true positive rate) from (0, 0) to (1, 1)."""

    auc: float


def _labels(values: Any, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1:
        raise DomainError(f"{name} must be a vector, got shape {array.shape}")
    if not np.all(np.isin(array, (-1, 1))):
        raise DomainError(f"{name} must contain only -1 and +1")
    return array.astype(int)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    """
    Count true/false positives and negatives.

    :param y_true: labels in {-1, +1}
    :param y_pred: predicted labels in {-1, +1}, same length
    :return: the counts
    """
    truth, predicted = _labels(y_true, "y_true"), _labels(y_pred, "y_pred")
    if len(truth) != len(predicted):
        raise DomainError(f"{len(truth)} true labels but {len(predicted)} predictions")
    if len(truth) == 0:
        raise DomainError("no labels")
    positive, predicted_positive = truth == 1, predicted == 1
    return ConfusionMatrix(
        tp=int(np.sum(positive & predicted_positive)),
        tn=int(np.sum(~positive & ~predicted_positive)),
        fp=int(np.sum(~positive & predicted_positive)),
        fn=int(np.sum(positive & ~predicted_positive)),
    )


def _safe_ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """
    Accuracy, precision, recall and F1 of a confusion matrix.

    Undefined ratios (no predicted positives, no actual positives) are 0.

    :param cm:
    :return: metrics
    """
    if cm.total == 0:
        raise DomainError("confusion matrix is empty")
    precision = _safe_ratio(cm.tp, cm.tp + cm.fp)
    recall = _safe_ratio(cm.tp, cm.tp + cm.fn)
    return Metrics(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=_safe_ratio(2 * precision * recall, precision + recall),
    )


def evaluate_predictions(y_true: Sequence[int], y_pred: Sequence[int]) -> Metrics:
    return compute_metrics(confusion_matrix(y_true, y_pred))


def roc_auc(y_true: Sequence[int], scores: Sequence[float]) -> RocCurve:
    """
    ROC curve and the area under it.

    Thresholds sweep the distinct scores in descending order; tied scores move the curve in one
    diagonal step, so the trapezoidal area equals the probability that a random positive
    outscores a random negative, with ties counting one half.

    :param y_true: labels in {-1, +1}, both classes present
    :param scores: one real score per label
    :return: curve points and area
    """
    truth = _labels(y_true, "y_true")
    values = np.asarray(scores, dtype=float)
    if values.shape != truth.shape:
        raise DomainError(f"{len(truth)} labels but scores of shape {values.shape}")
    n_positive = int(np.sum(truth == 1))
    n_negative = len(truth) - n_positive
    if n_positive == 0 or n_negative == 0:
        raise DomainError("ROC needs both classes in y_true")
    order = np.argsort(-values, kind="mergesort")
    sorted_values = values[order]
    positive = (truth[order] == 1).astype(float)
    last_of_group = np.r_[np.flatnonzero(np.diff(sorted_values)), len(values) - 1]
    tps = np.r_[0.0, np.cumsum(positive)[last_of_group]]
    fps = np.r_[0.0, (last_of_group + 1) - tps[1:]]
    tpr = tps / n_positive
    fpr = fps / n_negative
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(points=list(zip(fpr.tolist(), tpr.tolist())), auc=auc)
