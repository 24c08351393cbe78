"""Tests the multilayer perceptron."""

import unittest

import numpy as np
from pydantic import ValidationError

from ttpredict.models.mlp import MlpClassifier, MlpParams, mlp_fit, mlp_loss_and_grads
from tests.builders import blobs


def _numeric_gradient(loss, array: np.ndarray, h: float = 1e-6) -> np.ndarray:
    gradient = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        saved = array[index]
        array[index] = saved + h
        upper = loss()
        array[index] = saved - h
        lower = loss()
        array[index] = saved
        gradient[index] = (upper - lower) / (2 * h)
    return gradient


class TestMlp(unittest.TestCase):
    def test_zero_weights_give_constant_output(self):
        weights = [np.zeros((3, 2)), np.zeros((2, 1))]
        biases = [np.zeros(2), np.array([0.3])]
        model = MlpClassifier(MlpParams(), 0, weights, biases)
        scores, _ = model.predict_many(np.random.default_rng(0).normal(size=(5, 3)))
        self.assertTrue(np.allclose(scores, 1 / (1 + np.exp(-0.3))))

    def test_gradients(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=(8, 3))
            y = np.where(rng.random(8) < 0.5, -1, 1)
            weights = [rng.normal(size=(3, 4)), rng.normal(size=(4, 1))]
            biases = [rng.normal(size=4), rng.normal(size=1)]
            _, grad_weights, grad_biases = mlp_loss_and_grads(weights, biases, x, y)

            def loss():
                return mlp_loss_and_grads(weights, biases, x, y)[0]

            for analytic, array in zip(grad_weights + grad_biases, weights + biases):
                numeric = _numeric_gradient(loss, array)
                scale = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
                self.assertLess(np.max(np.abs(analytic - numeric) / scale), 1e-4, f"seed {seed}")

    def test_separable_blobs(self):
        x, y = blobs(0, 200, 2, separation=6.0)
        model = mlp_fit(x, y, MlpParams(hidden_layer_sizes=(4,), max_iter=200), seed=1)
        _, labels = model.predict_many(x)
        self.assertGreaterEqual(float(np.mean(labels == y)), 0.99)
        self.assertLess(model.loss_history[-1], model.loss_history[0])

    def test_determinism(self):
        x, y = blobs(3, 50, 3, separation=1.0)
        params = MlpParams(hidden_layer_sizes=(3, 2), max_iter=50)
        first, second = mlp_fit(x, y, params, seed=4), mlp_fit(x, y, params, seed=4)
        self.assertEqual(first.parameters_to_dict(), second.parameters_to_dict())
        other = mlp_fit(x, y, params, seed=5)
        self.assertNotEqual(first.parameters_to_dict(), other.parameters_to_dict())

    def test_needs_a_hidden_layer(self):
        with self.assertRaises(ValidationError):
            MlpParams(hidden_layer_sizes=())
        with self.assertRaises(ValidationError):
            MlpParams(hidden_layer_sizes=(0,))
