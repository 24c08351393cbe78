"""Soft-margin kernel support vector machine trained by sequential minimal optimization."""

import logging
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from pydantic import PositiveFloat, PositiveInt

from ttpredict.errors import ConvergenceError, DomainError
from ttpredict.models.base import Classifier, ModelFamily, Params, check_training_data

__all__ = [
    "Kernel",
    "SvmParams",
    "SvmClassifier",
    "kernel_eval",
    "kernel_matrix",
    "dual_objective",
    "svm_fit",
]

TAU = 1e-12
"""Lower bound on the curvature along a working pair, needed for indefinite kernels."""

logger = logging.getLogger(__name__)


class Kernel(Enum):
    linear = "linear"
    rbf = "rbf"
    polynomial = "poly"
    sigmoid = "sigmoid"


class SvmParams(Params):
    """
    Hyperparameters of the support vector machine.

    ``gamma`` defaults to ``1 / d`` for ``d`` input features, resolved when fitting.
    """

    kernel: Kernel = Kernel.linear
    c: PositiveFloat = 1.0
    gamma: Optional[PositiveFloat] = None
    degree: PositiveInt = 3
    coef0: float = 0.0
    tol: PositiveFloat = 1e-3
    max_iter: PositiveInt = 200_000


def kernel_matrix(params: SvmParams, gamma: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Kernel values between the rows of two matrices.

    :param params: kernel choice, degree and coef0
    :param gamma: resolved kernel coefficient
    :param u: m x d matrix
    :param v: n x d matrix
    :return: m x n matrix
    """
    if u.shape[1] != v.shape[1]:
        raise DomainError(f"kernel arguments have dimensions {u.shape[1]} and {v.shape[1]}")
    if params.kernel is Kernel.rbf:
        distances = (
            np.sum(u * u, axis=1)[:, np.newaxis] + np.sum(v * v, axis=1)[np.newaxis, :] - 2 * u @ v.T
        )
        return np.exp(-gamma * np.maximum(distances, 0.0))
    dot = u @ v.T
    if params.kernel is Kernel.linear:
        return dot
    if params.kernel is Kernel.polynomial:
        return (gamma * dot + params.coef0) ** params.degree
    return np.tanh(gamma * dot + params.coef0)


def kernel_eval(params: SvmParams, u: Any, v: Any) -> float:
    """
    Evaluate the kernel on two vectors.

    :param params:
    :param u:
    :param v:
    :return: kernel value
    """
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise DomainError(f"kernel arguments have shapes {u.shape} and {v.shape}")
    gamma = params.gamma if params.gamma is not None else 1.0 / len(u)
    if params.kernel is Kernel.rbf:
        diff = u - v
        return float(np.exp(-gamma * (diff @ diff)))
    dot = float(u @ v)
    if params.kernel is Kernel.linear:
        return dot
    if params.kernel is Kernel.polynomial:
        return float((gamma * dot + params.coef0) ** params.degree)
    return float(np.tanh(gamma * dot + params.coef0))


def dual_objective(alpha: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    """Soft-margin dual objective ``sum(alpha) - alpha'Qalpha / 2`` with ``Q = yy' * K``."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ kernel @ ay)


class SvmClassifier(Classifier):
    """Scores are signed margins; the threshold is 0."""

    family = ModelFamily.svm
    params_class = SvmParams
    threshold = 0.0

    def __init__(
        self,
        params: SvmParams,
        seed: int,
        gamma: float,
        support_vectors: np.ndarray,
        dual_coef: np.ndarray,
        bias: float,
        alpha: Optional[np.ndarray] = None,
        kkt_violation: Optional[float] = None,
        n_iter: int = 0,
    ):
        super().__init__(params, seed, support_vectors.shape[1])
        self.gamma = gamma
        self.support_vectors = support_vectors
        self.dual_coef = dual_coef
        """``alpha_i * y_i`` for each support vector."""

        self.bias = bias
        self.alpha = alpha
        """Dual variables of every training row; only set on a freshly fitted model."""

        self.kkt_violation = kkt_violation
        self.n_iter = n_iter

    def _scores(self, x: np.ndarray) -> np.ndarray:
        if len(self.dual_coef) == 0:
            return np.full(len(x), self.bias)
        kernel = kernel_matrix(self.params, self.gamma, x, self.support_vectors)
        return kernel @ self.dual_coef + self.bias

    def parameters_to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
        }

    @classmethod
    def from_parameters(cls, params, seed, n_features, parameters):
        support_vectors = np.asarray(parameters["support_vectors"], dtype=float)
        return cls(
            params,
            seed,
            float(parameters["gamma"]),
            support_vectors.reshape(-1, n_features),
            np.asarray(parameters["dual_coef"], dtype=float),
            float(parameters["bias"]),
        )


def svm_fit(x: Any, y: Any, params: SvmParams, seed: int = 0) -> SvmClassifier:
    """
    Fit the soft-margin dual by sequential minimal optimization.

    Each iteration picks the maximal violating pair and solves the two-variable subproblem
    exactly under the box ``[0, C]`` and the equality ``sum(alpha * y) = 0``. Optimization
    stops when the KKT violation (the gap between the largest and smallest ``-y_t * G_t`` over
    the feasible index sets) is at most ``tol``.

    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params:
    :param seed: recorded only; the working-set choice is deterministic
    :return: fitted classifier
    :raises ConvergenceError: if ``max_iter`` iterations do not reach ``tol``
    """
    x, y = check_training_data(x, y)
    n, d = x.shape
    yf = y.astype(float)
    gamma = params.gamma if params.gamma is not None else 1.0 / d
    kernel = kernel_matrix(params, gamma, x, x)
    diagonal = np.diag(kernel)
    c = params.c
    alpha = np.zeros(n)
    gradient = -np.ones(n)
    violation = np.inf
    n_iter = 0
    while True:
        score = -yf * gradient
        up = ((yf > 0) & (alpha < c)) | ((yf < 0) & (alpha > 0))
        low = ((yf < 0) & (alpha < c)) | ((yf > 0) & (alpha > 0))
        if not up.any() or not low.any():
            violation = 0.0
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        violation = float(score[i] - score[j])
        if violation <= params.tol:
            break
        if n_iter >= params.max_iter:
            raise ConvergenceError(
                f"SMO did not converge in {params.max_iter} iterations", violation
            )
        n_iter += 1
        curvature = max(diagonal[i] + diagonal[j] - 2 * kernel[i, j], TAU)
        step = violation / curvature
        step = min(step, c - alpha[i] if yf[i] > 0 else alpha[i])
        step = min(step, alpha[j] if yf[j] > 0 else c - alpha[j])
        alpha[i] = min(max(alpha[i] + yf[i] * step, 0.0), c)
        alpha[j] = min(max(alpha[j] - yf[j] * step, 0.0), c)
        gradient += step * yf * (kernel[:, i] - kernel[:, j])
    score = -yf * gradient
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(score[free].mean())
    else:
        upper = score[up].max() if up.any() else score[low].min()
        lower = score[low].min() if low.any() else upper
        bias = float((upper + lower) / 2)
    logger.debug(f"SMO converged after {n_iter} iterations, violation {violation:.3g}")
    support = alpha > 0
    return SvmClassifier(
        params,
        seed,
        gamma,
        x[support],
        alpha[support] * yf[support],
        bias,
        alpha=alpha,
        kkt_violation=violation,
        n_iter=n_iter,
    )
