"""Multilayer perceptron with relu hidden layers and a sigmoid output unit."""

import logging
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import PositiveFloat, PositiveInt, field_validator

from ttpredict.models.base import Classifier, ModelFamily, Params, check_training_data, sigmoid
from ttpredict.rng import get_rng

__all__ = [
    "Activation",
    "MlpParams",
    "MlpClassifier",
    "mlp_fit",
    "mlp_loss_and_grads",
]

logger = logging.getLogger(__name__)

Layers = List[np.ndarray]


class Activation(Enum):
    relu = "relu"


class MlpParams(Params):
    """
    Hyperparameters of the multilayer perceptron.

    ``hidden_layer_sizes`` lists the width of every hidden layer; ``(2,)`` is a single hidden
    layer of two units.
    """

    hidden_layer_sizes: Tuple[PositiveInt, ...] = (2,)
    activation: Activation = Activation.relu
    max_iter: PositiveInt = 200
    learning_rate: PositiveFloat = 0.5
    tol: PositiveFloat = 1e-6

    @field_validator("hidden_layer_sizes")
    @classmethod
    def _at_least_one_layer(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("at least one hidden layer is required")
        return value


def _forward(weights: Layers, biases: Layers, x: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Hidden activations of every layer (input first) and the output logits."""
    activations = [x]
    for w, b in zip(weights[:-1], biases[:-1]):
        activations.append(np.maximum(activations[-1] @ w + b, 0.0))
    logits = (activations[-1] @ weights[-1] + biases[-1]).ravel()
    return activations, logits


def mlp_loss_and_grads(
    weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], x: Any, y: Any
) -> Tuple[float, Layers, Layers]:
    """
    Mean binary cross-entropy of a network and its gradients by backpropagation.

    :param weights: one ``fan_in x fan_out`` matrix per layer, the output layer last
    :param biases: one vector per layer
    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :return: (loss, weight gradients, bias gradients)
    """
    x = np.asarray(x, dtype=float)
    t = (np.asarray(y, dtype=float) + 1.0) / 2.0
    n = len(t)
    activations, logits = _forward(weights, biases, x)
    loss = float(np.mean(np.logaddexp(0.0, logits) - t * logits))
    delta = ((sigmoid(logits) - t) / n)[:, np.newaxis]
    grad_weights: Layers = [np.empty(0)] * len(weights)
    grad_biases: Layers = [np.empty(0)] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_weights[layer] = activations[layer].T @ delta
        grad_biases[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0)
    return loss, grad_weights, grad_biases


class MlpClassifier(Classifier):
    """Scores are win probabilities."""

    family = ModelFamily.mlp
    params_class = MlpParams

    def __init__(
        self,
        params: MlpParams,
        seed: int,
        weights: Layers,
        biases: Layers,
        n_iter: int = 0,
        converged: bool = True,
        loss_history: List[float] = None,
    ):
        super().__init__(params, seed, weights[0].shape[0])
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.n_iter = n_iter
        self.converged = converged
        self.loss_history = loss_history or []

    def _scores(self, x: np.ndarray) -> np.ndarray:
        _, logits = _forward(self.weights, self.biases, x)
        return sigmoid(logits)

    def parameters_to_dict(self) -> Dict[str, Any]:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_parameters(cls, params, seed, n_features, parameters):
        weights = [np.asarray(w, dtype=float) for w in parameters["weights"]]
        biases = [np.asarray(b, dtype=float) for b in parameters["biases"]]
        weights[0] = weights[0].reshape(n_features, -1)
        return cls(params, seed, weights, biases)


def _initial_layers(sizes: List[int], seed: int) -> Tuple[Layers, Layers]:
    rng = get_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def mlp_fit(x: Any, y: Any, params: MlpParams, seed: int = 0) -> MlpClassifier:
    """
    Fit a multilayer perceptron by full-batch gradient descent.

    Weights start uniform in ``+-sqrt(6 / (fan_in + fan_out))``, drawn from the seeded
    generator, and biases at zero. Training stops when the loss changes by less than ``tol``
    between epochs or after ``max_iter`` epochs.

    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params:
    :param seed: seeds the weight initialization
    :return: fitted classifier
    """
    x, y = check_training_data(x, y)
    sizes = [x.shape[1], *params.hidden_layer_sizes, 1]
    weights, biases = _initial_layers(sizes, seed)
    rate = params.learning_rate
    loss, grad_weights, grad_biases = mlp_loss_and_grads(weights, biases, x, y)
    history = [loss]
    converged = False
    n_iter = 0
    for n_iter in range(1, params.max_iter + 1):
        weights = [w - rate * g for w, g in zip(weights, grad_weights)]
        biases = [b - rate * g for b, g in zip(biases, grad_biases)]
        loss, grad_weights, grad_biases = mlp_loss_and_grads(weights, biases, x, y)
        history.append(loss)
        if abs(history[-2] - loss) < params.tol:
            converged = True
            break
    if not converged:
        logger.info(
            f"perceptron loss still moving after {params.max_iter} epochs (loss {loss:.4g})"
        )
    return MlpClassifier(params, seed, weights, biases, n_iter, converged, history)
