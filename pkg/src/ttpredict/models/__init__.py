"""Classifier families behind one fit/score/predict contract."""

from ttpredict.models.base import Classifier, ModelFamily, Params
from ttpredict.models.baseline import BaselineParams, baseline_fit
from ttpredict.models.forest import ForestParams, rf_feature_importances, rf_fit
from ttpredict.models.logreg import LogRegParams, Penalty, logreg_fit
from ttpredict.models.mlp import MlpParams, mlp_fit
from ttpredict.models.pipeline import FittedPipeline, fit_pipeline
from ttpredict.models.registry import (
    PRESETS,
    ModelSpec,
    classifier_from_dict,
    fit_classifier,
    get_preset,
    predict,
)
from ttpredict.models.svm import Kernel, SvmParams, kernel_eval, svm_fit

__all__ = [
    "Classifier",
    "ModelFamily",
    "Params",
    "BaselineParams",
    "ForestParams",
    "LogRegParams",
    "Penalty",
    "MlpParams",
    "SvmParams",
    "Kernel",
    "ModelSpec",
    "PRESETS",
    "FittedPipeline",
    "baseline_fit",
    "rf_fit",
    "rf_feature_importances",
    "logreg_fit",
    "mlp_fit",
    "svm_fit",
    "kernel_eval",
    "fit_pipeline",
    "fit_classifier",
    "classifier_from_dict",
    "get_preset",
    "predict",
]
