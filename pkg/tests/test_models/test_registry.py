"""Tests presets, the family-agnostic entry points, baselines and saved pipelines."""

import io
import json
import unittest

import numpy as np

from ttpredict.datamodel.features import FeatureSet, build_samples, feature_matrix
from ttpredict.datamodel.match import Side
from ttpredict.errors import DegenerateFitError, DomainError
from ttpredict.ingest.ingest_synth import SynthConfig, synth_generate
from ttpredict.io.parser import load_pipeline
from ttpredict.io.writer import pipeline_to_file
from ttpredict.models.base import ModelFamily
from ttpredict.models.baseline import BaselineParams, Strategy, baseline_fit
from ttpredict.models.forest import ForestParams
from ttpredict.models.logreg import LogRegParams, Penalty
from ttpredict.models.mlp import MlpParams
from ttpredict.models.pipeline import FittedPipeline, fit_pipeline
from ttpredict.models.registry import (
    PRESETS,
    ModelSpec,
    classifier_from_dict,
    fit_classifier,
    get_preset,
    predict,
)
from ttpredict.models.svm import Kernel, SvmParams
from tests import OUTPUT_DIR
from tests.builders import blobs

SMALL = {
    "logreg": ModelSpec(name="logreg", family=ModelFamily.logreg),
    "forest": ModelSpec(name="forest", family=ModelFamily.forest, params={"n_trees": 7}),
    "svm_rbf": ModelSpec(name="svm_rbf", family=ModelFamily.svm, params={"kernel": "rbf"}),
    "svm_poly": ModelSpec(name="svm_poly", family=ModelFamily.svm, params={"kernel": "poly"}),
    "mlp": ModelSpec(name="mlp", family=ModelFamily.mlp, params={"hidden_layer_sizes": [3, 2]}),
    "baseline": PRESETS["baseline"],
}


class TestPresets(unittest.TestCase):
    def test_published_defaults(self):
        self.assertEqual(
            LogRegParams(penalty=Penalty.l2, c=1.0), PRESETS["logreg"].build_params()
        )
        self.assertEqual(
            SvmParams(kernel=Kernel.linear, c=0.2), PRESETS["svm_linear"].build_params()
        )
        self.assertEqual(
            ForestParams(n_trees=200, max_depth=80, max_features=4, min_samples_leaf=4),
            PRESETS["forest"].build_params(),
        )
        self.assertEqual(
            MlpParams(hidden_layer_sizes=(2,), max_iter=200), PRESETS["mlp"].build_params()
        )

    def test_overrides(self):
        spec = get_preset("svm_rbf")
        self.assertEqual(1.5, spec.build_params({"c": 1.5}).c)
        self.assertEqual(Kernel.rbf, spec.with_params({"gamma": 0.1}).build_params().kernel)
        self.assertEqual(0.2, spec.build_params().c)

    def test_unknown(self):
        with self.assertRaises(DomainError):
            get_preset("xgboost")

    def test_wrong_params(self):
        x, y = blobs(0, 10)
        with self.assertRaises(DomainError):
            fit_classifier(ModelFamily.svm, x, y, LogRegParams(), 0)


class TestBaseline(unittest.TestCase):
    def test_majority(self):
        x = np.zeros((4, 2))
        model = baseline_fit(x, [1, 1, 1, -1], BaselineParams())
        self.assertEqual((0.75, 1), predict(model, [3.0, 1.0]))

    def test_constant(self):
        x = np.zeros((4, 2))
        model = baseline_fit(x, [1, -1, 1, -1], BaselineParams(strategy=Strategy.constant))
        self.assertEqual((1.0, 1), model.predict([0.0, 0.0]))
        negative = baseline_fit(x, [1, -1], BaselineParams(strategy=Strategy.constant, constant=-1))
        self.assertEqual((0.0, -1), negative.predict([0.0, 0.0]))

    def test_single_class_accepted(self):
        model = baseline_fit(np.zeros((3, 1)), [-1, -1, -1], BaselineParams())
        self.assertEqual((0.0, -1), model.predict([1.0]))


class TestPipeline(unittest.TestCase):
    def setUp(self) -> None:
        matches = synth_generate(SynthConfig(n_players=8, n_matches=30, seed=2))
        self.samples = build_samples(matches)
        self.x, self.y = feature_matrix(self.samples)

    def test_round_trip_every_family(self):
        OUTPUT_DIR.mkdir(exist_ok=True)
        for name, spec in SMALL.items():
            pipeline = fit_pipeline(spec, self.x, self.y, seed=3)
            path = OUTPUT_DIR / f"pipeline.{name}.json"
            with path.open("w", encoding="utf-8") as file:
                pipeline_to_file(pipeline, file)
            loaded = load_pipeline(path)
            self.assertEqual(name, loaded.name)
            for got, expected in zip(loaded.score(self.x), pipeline.score(self.x)):
                self.assertEqual(expected.tolist(), got.tolist(), name)

    def test_classifier_document(self):
        classifier = fit_classifier(ModelFamily.logreg, self.x, self.y, LogRegParams(), 7)
        document = json.loads(json.dumps(classifier.to_dict()))
        self.assertEqual("logreg", document["family"])
        self.assertEqual(7, document["seed"])
        copy = classifier_from_dict(document)
        self.assertEqual(classifier.predict(self.x[0]), copy.predict(self.x[0]))
        with self.assertRaises(DomainError):
            classifier_from_dict({**document, "family": "boosting"})

    def test_feature_set_is_recorded(self):
        samples = build_samples(
            synth_generate(SynthConfig(n_players=8, n_matches=30, seed=2)),
            feature_set=FeatureSet.without_derived,
        )
        x, y = feature_matrix(samples)
        pipeline = fit_pipeline(SMALL["logreg"], x, y, 0, feature_set=FeatureSet.without_derived)
        buffer = io.StringIO()
        pipeline_to_file(pipeline, buffer)
        copy = FittedPipeline.from_dict(json.loads(buffer.getvalue()))
        self.assertEqual(FeatureSet.without_derived, copy.feature_set)
        self.assertEqual(7, copy.standardizer.dimension)

    def test_predict_is_deterministic(self):
        pipeline = fit_pipeline(SMALL["forest"], self.x, self.y, seed=1)
        row = pipeline.standardizer.apply(self.x[5])
        outputs = {predict(pipeline.classifier, row) for _ in range(100)}
        self.assertEqual(1, len(outputs))

    def test_mirrored_training_set(self):
        # listing every match from the other perspective first permutes the rows
        order = [i + 1 if sample.perspective is Side.a else i - 1 for i, sample in enumerate(self.samples)]
        spec = SMALL["logreg"]
        original = fit_pipeline(spec, self.x, self.y, seed=0)
        mirrored = fit_pipeline(spec, self.x[order], self.y[order], seed=0)
        accuracy = np.mean(original.score(self.x)[1] == self.y)
        mirrored_accuracy = np.mean(mirrored.score(self.x[order])[1] == self.y[order])
        self.assertAlmostEqual(accuracy, mirrored_accuracy, delta=1 / len(self.y))

    def test_degenerate(self):
        with self.assertRaises(DegenerateFitError):
            fit_pipeline(SMALL["logreg"], self.x[:3], np.ones(3, dtype=int), seed=0)
