"""Metrics, match-grouped splits, cross-validation and grid search."""

from ttpredict.evaluation.metrics import (
    ConfusionMatrix,
    Metrics,
    RocCurve,
    compute_metrics,
    confusion_matrix,
    roc_auc,
)
from ttpredict.evaluation.search import CvResult, GridResult, cross_validate, grid_search, learning_curve
from ttpredict.evaluation.splits import SplitPlan, fold_fingerprint, kfold_split, train_val_test_split

__all__ = [
    "ConfusionMatrix",
    "Metrics",
    "RocCurve",
    "CvResult",
    "GridResult",
    "SplitPlan",
    "compute_metrics",
    "confusion_matrix",
    "roc_auc",
    "cross_validate",
    "grid_search",
    "learning_curve",
    "kfold_split",
    "train_val_test_split",
    "fold_fingerprint",
]
