"""A classifier bundled with the standardizer fitted on its training rows."""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ttpredict.datamodel.features import FeatureSet, LabeledSample, Standardizer, feature_matrix
from ttpredict.models.base import Classifier, Params
from ttpredict.models.registry import ModelSpec, classifier_from_dict, fit_classifier

__all__ = [
    "FittedPipeline",
    "fit_pipeline",
]


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    """Standardize raw feature rows, then score them."""

    standardizer: Standardizer
    classifier: Classifier
    feature_set: FeatureSet = FeatureSet.full
    name: Optional[str] = None

    def score(self, x: Any) -> Tuple[np.ndarray, np.ndarray]:
        """
        Score raw (unstandardized) feature rows.

        :param x: n x d matrix
        :return: (scores, labels)
        """
        return self.classifier.predict_many(self.standardizer.apply(np.asarray(x, dtype=float)))

    def score_samples(self, samples: Sequence[LabeledSample]) -> Tuple[np.ndarray, np.ndarray]:
        x, _ = feature_matrix(samples)
        return self.score(x)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "feature_set": self.feature_set.value,
            "standardizer": self.standardizer.to_dict(),
            "classifier": self.classifier.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "FittedPipeline":
        return cls(
            standardizer=Standardizer.from_dict(obj["standardizer"]),
            classifier=classifier_from_dict(obj["classifier"]),
            feature_set=FeatureSet(obj.get("feature_set", FeatureSet.full.value)),
            name=obj.get("name"),
        )


def fit_pipeline(
    spec: ModelSpec,
    x: Any,
    y: Any,
    seed: int,
    params: Optional[Params] = None,
    feature_set: FeatureSet = FeatureSet.full,
) -> FittedPipeline:
    """
    Fit a standardizer on the training rows only, then the classifier on the standardized rows.

    :param spec: the model to fit
    :param x: raw n x d training matrix
    :param y: labels in {-1, +1}
    :param seed:
    :param params: hyperparameters to use instead of ``spec.params``
    :param feature_set: recorded so the pipeline can featurize new matches the same way
    :return: fitted pipeline
    """
    standardizer = Standardizer.fit(x)
    params = params if params is not None else spec.build_params()
    classifier = fit_classifier(spec.family, standardizer.apply(x), y, params, seed)
    return FittedPipeline(standardizer, classifier, feature_set, spec.name)
