"""Model families, named presets and the family-agnostic fit/load entry points."""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field

from ttpredict.errors import DomainError
from ttpredict.models.base import Classifier, ModelFamily, Params
from ttpredict.models.baseline import BaselineClassifier, BaselineParams, baseline_fit
from ttpredict.models.forest import ForestParams, RandomForestClassifier, rf_fit
from ttpredict.models.logreg import LogisticRegressionClassifier, LogRegParams, logreg_fit
from ttpredict.models.mlp import MlpClassifier, MlpParams, mlp_fit
from ttpredict.models.svm import SvmClassifier, SvmParams, svm_fit

__all__ = [
    "FamilyEntry",
    "FAMILIES",
    "ModelSpec",
    "PRESETS",
    "get_preset",
    "fit_classifier",
    "classifier_from_dict",
    "predict",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FamilyEntry:
    """How to fit and rebuild one model family."""

    params_class: Type[Params]
    classifier_class: Type[Classifier]
    fit: Callable[..., Classifier]


FAMILIES: Dict[ModelFamily, FamilyEntry] = {
    ModelFamily.logreg: FamilyEntry(LogRegParams, LogisticRegressionClassifier, logreg_fit),
    ModelFamily.forest: FamilyEntry(ForestParams, RandomForestClassifier, rf_fit),
    ModelFamily.svm: FamilyEntry(SvmParams, SvmClassifier, svm_fit),
    ModelFamily.mlp: FamilyEntry(MlpParams, MlpClassifier, mlp_fit),
    ModelFamily.baseline: FamilyEntry(BaselineParams, BaselineClassifier, baseline_fit),
}


class ModelSpec(BaseModel):
    """
    A named model: its family, hyperparameters and, optionally, a grid to search.

    Grid values override ``params`` key by key when a combination is evaluated.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    family: ModelFamily
    params: Dict[str, Any] = Field(default_factory=dict)
    grid: Optional[Dict[str, List[Any]]] = None

    def build_params(self, overrides: Optional[Mapping[str, Any]] = None) -> Params:
        """
        Validate the hyperparameters of this model.

        :param overrides: values replacing those in ``params``
        :return: the family's hyperparameter record
        """
        values = {**self.params, **(overrides or {})}
        return FAMILIES[self.family].params_class.model_validate(values)

    def with_params(self, overrides: Mapping[str, Any]) -> "ModelSpec":
        return self.model_copy(update={"params": {**self.params, **overrides}, "grid": None})


PRESETS: Dict[str, ModelSpec] = {
    spec.name: spec
    for spec in [
        ModelSpec(name="logreg", family=ModelFamily.logreg, params={"penalty": "l2", "c": 1.0}),
        ModelSpec(
            name="forest",
            family=ModelFamily.forest,
            params={"n_trees": 200, "max_depth": 80, "max_features": 4, "min_samples_leaf": 4},
        ),
        ModelSpec(name="svm_linear", family=ModelFamily.svm, params={"kernel": "linear", "c": 0.2}),
        ModelSpec(name="svm_rbf", family=ModelFamily.svm, params={"kernel": "rbf", "c": 0.2}),
        ModelSpec(name="svm_poly", family=ModelFamily.svm, params={"kernel": "poly", "c": 0.2}),
        ModelSpec(
            name="svm_sigmoid", family=ModelFamily.svm, params={"kernel": "sigmoid", "c": 0.2}
        ),
        ModelSpec(
            name="mlp", family=ModelFamily.mlp, params={"hidden_layer_sizes": [2], "max_iter": 200}
        ),
        ModelSpec(name="baseline", family=ModelFamily.baseline, params={"strategy": "majority"}),
    ]
}
"""Published default hyperparameters of every model, keyed by model name."""


def get_preset(name: str) -> ModelSpec:
    if name not in PRESETS:
        raise DomainError(f"unknown model {name}, expected one of {', '.join(PRESETS)}")
    return PRESETS[name]


def fit_classifier(family: ModelFamily, x: Any, y: Any, params: Params, seed: int) -> Classifier:
    """
    Fit a classifier of any family.

    :param family:
    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params: a hyperparameter record of that family
    :param seed:
    :return: fitted classifier
    """
    entry = FAMILIES[family]
    if not isinstance(params, entry.params_class):
        raise DomainError(f"{type(params).__name__} are not {family.value} hyperparameters")
    logger.debug(f"fitting {family.value} on {len(x)} rows with {params}")
    return entry.fit(x, y, params, seed)


def classifier_from_dict(obj: Mapping[str, Any]) -> Classifier:
    """
    Rebuild a classifier from the output of :meth:`Classifier.to_dict`.

    :param obj:
    :return: classifier making the same predictions
    """
    try:
        family = ModelFamily(obj["family"])
    except (KeyError, ValueError) as e:
        raise DomainError(f"model document has no valid family: {e}") from e
    entry = FAMILIES[family]
    params = entry.params_class.model_validate(obj["params"])
    return entry.classifier_class.from_parameters(
        params, int(obj["seed"]), int(obj["n_features"]), obj["parameters"]
    )


def predict(classifier: Classifier, x: Any) -> Tuple[float, int]:
    """
    Score and label one feature vector.

    :param classifier:
    :param x:
    :return: (score, label in {-1, +1})
    """
    return classifier.predict(x)
