"""Penalized logistic regression fitted by proximal gradient descent."""

import logging
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import PositiveFloat, PositiveInt

from ttpredict.models.base import Classifier, ModelFamily, Params, check_training_data, sigmoid

__all__ = [
    "Penalty",
    "LogRegParams",
    "LogisticRegressionClassifier",
    "logreg_fit",
    "logreg_loss_and_grad",
]

MAX_STEP = 1e3
MIN_STEP = 1e-16

logger = logging.getLogger(__name__)


class Penalty(Enum):
    l1 = "l1"
    l2 = "l2"


class LogRegParams(Params):
    """
    Hyperparameters of logistic regression.

    The objective is the mean binary cross-entropy plus ``|w|_1 / c`` (L1) or
    ``|w|_2^2 / (2c)`` (L2); the bias is not penalized. Lower ``c`` regularizes more.
    """

    penalty: Penalty = Penalty.l2
    c: PositiveFloat = 1.0
    max_iter: PositiveInt = 1000
    tol: PositiveFloat = 1e-4


def _targets(y: np.ndarray) -> np.ndarray:
    return (np.asarray(y, dtype=float) + 1.0) / 2.0


def _smooth_loss(
    w: np.ndarray, b: float, x: np.ndarray, t: np.ndarray, params: LogRegParams
) -> Tuple[float, np.ndarray, float]:
    z = x @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - t * z))
    residual = sigmoid(z) - t
    grad_w = x.T @ residual / len(t)
    grad_b = float(np.mean(residual))
    if params.penalty is Penalty.l2:
        loss += float(w @ w) / (2 * params.c)
        grad_w = grad_w + w / params.c
    return loss, grad_w, grad_b


def logreg_loss_and_grad(
    w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, params: LogRegParams
) -> Tuple[float, np.ndarray, float]:
    """
    Penalized objective and its (sub)gradient.

    For the L1 penalty the subgradient uses ``sign(w)``, which is the gradient wherever no
    weight is exactly zero.

    :param w: weights
    :param b: bias
    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params:
    :return: (loss, gradient with respect to w, derivative with respect to b)
    """
    loss, grad_w, grad_b = _smooth_loss(np.asarray(w, float), b, x, _targets(y), params)
    if params.penalty is Penalty.l1:
        loss += float(np.abs(w).sum()) / params.c
        grad_w = grad_w + np.sign(w) / params.c
    return loss, grad_w, grad_b


def _soft_threshold(v: np.ndarray, amount: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - amount, 0.0)


class LogisticRegressionClassifier(Classifier):
    """Scores are win probabilities."""

    family = ModelFamily.logreg
    params_class = LogRegParams

    def __init__(
        self,
        params: LogRegParams,
        seed: int,
        weights: np.ndarray,
        bias: float,
        n_iter: int = 0,
        converged: bool = True,
        loss_history: List[float] = None,
    ):
        super().__init__(params, seed, len(weights))
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)
        self.n_iter = n_iter
        self.converged = converged
        self.loss_history = loss_history or []

    def _scores(self, x: np.ndarray) -> np.ndarray:
        return sigmoid(x @ self.weights + self.bias)

    def parameters_to_dict(self) -> Dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_parameters(cls, params, seed, n_features, parameters):
        return cls(params, seed, np.asarray(parameters["weights"]), parameters["bias"])


def logreg_fit(x: Any, y: Any, params: LogRegParams, seed: int = 0) -> LogisticRegressionClassifier:
    """
    Fit logistic regression.

    Proximal gradient descent with backtracking: every accepted step satisfies the sufficient
    decrease condition, so the objective never increases, and the L1 proximal step can set
    weights exactly to zero. Iteration stops when the norm of the gradient mapping is at most
    ``tol`` or after ``max_iter`` steps.

    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params:
    :param seed: recorded only; the fit is deterministic
    :return: fitted classifier
    """
    x, y = check_training_data(x, y)
    t = _targets(y)
    l1 = 1.0 / params.c if params.penalty is Penalty.l1 else 0.0
    w, b = np.zeros(x.shape[1]), 0.0
    f, grad_w, grad_b = _smooth_loss(w, b, x, t, params)
    history = [f + l1 * float(np.abs(w).sum())]
    step = 1.0
    converged = False
    n_iter = 0
    for n_iter in range(1, params.max_iter + 1):
        while True:
            w_new = _soft_threshold(w - step * grad_w, step * l1)
            b_new = b - step * grad_b
            f_new, grad_w_new, grad_b_new = _smooth_loss(w_new, b_new, x, t, params)
            dw, db = w_new - w, b_new - b
            bound = f + grad_w @ dw + grad_b * db + (dw @ dw + db * db) / (2 * step)
            if f_new <= bound + 1e-15 or step <= MIN_STEP:
                break
            step /= 2
        mapping_norm = np.sqrt(dw @ dw + db * db) / step
        w, b, f, grad_w, grad_b = w_new, b_new, f_new, grad_w_new, grad_b_new
        history.append(f + l1 * float(np.abs(w).sum()))
        if mapping_norm <= params.tol:
            converged = True
            break
        step = min(step * 2, MAX_STEP)
    if not converged:
        logger.warning(
            f"logistic regression did not reach tol={params.tol} in {params.max_iter} iterations"
        )
    return LogisticRegressionClassifier(params, seed, w, b, n_iter, converged, history)
