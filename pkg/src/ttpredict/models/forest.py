"""Random forest of CART trees split on Gini impurity."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import PositiveInt

from ttpredict.errors import DomainError
from ttpredict.models.base import Classifier, ModelFamily, Params, check_training_data
from ttpredict.rng import get_rng

__all__ = [
    "ForestParams",
    "TreeNode",
    "RandomForestClassifier",
    "gini_impurity",
    "rf_fit",
    "rf_feature_importances",
]

logger = logging.getLogger(__name__)


class ForestParams(Params):
    n_trees: PositiveInt = 200
    max_depth: PositiveInt = 80
    max_features: PositiveInt = 4
    min_samples_leaf: PositiveInt = 4


@dataclass
class TreeNode:
    """A split node (feature, threshold, children) or a leaf (class counts)."""

    feature: Optional[int] = None
    threshold: Optional[float] = None
    """Rows with ``x[feature] <= threshold`` go left."""

    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    leaf_counts: Optional[Tuple[int, int]] = None
    """Training rows reaching the leaf, as (negative, positive)."""

    @property
    def is_leaf(self) -> bool:
        return self.leaf_counts is not None

    def to_dict(self) -> Dict[str, Any]:
        if self.is_leaf:
            return {"leaf_counts": list(self.leaf_counts)}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj: Dict[str, Any]) -> "TreeNode":
        if "leaf_counts" in obj:
            negative, positive = obj["leaf_counts"]
            return cls(leaf_counts=(int(negative), int(positive)))
        return cls(
            feature=int(obj["feature"]),
            threshold=float(obj["threshold"]),
            left=cls.from_dict(obj["left"]),
            right=cls.from_dict(obj["right"]),
        )


def gini_impurity(negative: float, positive: float) -> float:
    total = negative + positive
    if total == 0:
        return 0.0
    p = positive / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


class _TreeBuilder:
    def __init__(self, x: np.ndarray, t: np.ndarray, params: ForestParams, rng, n_total: int):
        self.x = x
        self.t = t
        self.params = params
        self.rng = rng
        self.n_total = n_total
        self.importances = np.zeros(x.shape[1])

    def _best_split(self, rows: np.ndarray) -> Optional[Tuple[float, int, float]]:
        n = len(rows)
        leaf = self.params.min_samples_leaf
        candidates = self.rng.choice(self.x.shape[1], size=self.params.max_features, replace=False)
        best = None
        for feature in candidates:
            values = self.x[rows, feature]
            order = np.argsort(values, kind="stable")
            sorted_values = values[order]
            sorted_t = self.t[rows][order]
            n_left = np.arange(1, n)
            pos_left = np.cumsum(sorted_t)[:-1]
            pos_right = sorted_t.sum() - pos_left
            n_right = n - n_left
            valid = (
                (sorted_values[1:] > sorted_values[:-1])
                & (n_left >= leaf)
                & (n_right >= leaf)
            )
            if not valid.any():
                continue
            p_left = pos_left / n_left
            p_right = pos_right / n_right
            gini_left = 2.0 * p_left * (1.0 - p_left)
            gini_right = 2.0 * p_right * (1.0 - p_right)
            weighted = np.where(valid, (n_left * gini_left + n_right * gini_right) / n, np.inf)
            position = int(np.argmin(weighted))
            if best is None or weighted[position] < best[0]:
                low, high = sorted_values[position], sorted_values[position + 1]
                threshold = float(low + (high - low) / 2.0)
                if threshold >= high:
                    threshold = float(low)
                best = (float(weighted[position]), int(feature), threshold)
        return best

    def grow(self, rows: np.ndarray, depth: int) -> TreeNode:
        positive = int(self.t[rows].sum())
        negative = len(rows) - positive
        impurity = gini_impurity(negative, positive)
        if (
            depth >= self.params.max_depth
            or impurity == 0.0
            or len(rows) < 2 * self.params.min_samples_leaf
        ):
            return TreeNode(leaf_counts=(negative, positive))
        best = self._best_split(rows)
        if best is None or best[0] >= impurity - 1e-12:
            return TreeNode(leaf_counts=(negative, positive))
        weighted, feature, threshold = best
        self.importances[feature] += len(rows) / self.n_total * (impurity - weighted)
        goes_left = self.x[rows, feature] <= threshold
        return TreeNode(
            feature=feature,
            threshold=threshold,
            left=self.grow(rows[goes_left], depth + 1),
            right=self.grow(rows[~goes_left], depth + 1),
        )


def _votes(node: TreeNode, x: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        negative, positive = node.leaf_counts
        out[rows] = 1.0 if positive > negative else 0.0
        return
    goes_left = x[rows, node.feature] <= node.threshold
    _votes(node.left, x, rows[goes_left], out)
    _votes(node.right, x, rows[~goes_left], out)


class RandomForestClassifier(Classifier):
    """Scores are the fraction of trees voting +1."""

    family = ModelFamily.forest
    params_class = ForestParams

    def __init__(
        self,
        params: ForestParams,
        seed: int,
        n_features: int,
        trees: List[TreeNode],
        importances: np.ndarray,
    ):
        super().__init__(params, seed, n_features)
        self.trees = trees
        self.importances = np.asarray(importances, dtype=float)

    def _scores(self, x: np.ndarray) -> np.ndarray:
        total = np.zeros(len(x))
        rows = np.arange(len(x))
        votes = np.empty(len(x))
        for tree in self.trees:
            _votes(tree, x, rows, votes)
            total += votes
        return total / len(self.trees)

    def parameters_to_dict(self) -> Dict[str, Any]:
        return {
            "trees": [tree.to_dict() for tree in self.trees],
            "importances": self.importances.tolist(),
        }

    @classmethod
    def from_parameters(cls, params, seed, n_features, parameters):
        trees = [TreeNode.from_dict(tree) for tree in parameters["trees"]]
        return cls(params, seed, n_features, trees, np.asarray(parameters["importances"]))


def rf_fit(x: Any, y: Any, params: ForestParams, seed: int = 0) -> RandomForestClassifier:
    """
    Fit a random forest.

    Tree ``i`` draws its bootstrap sample and per-node feature subsets from a generator seeded
    with ``seed ^ i``, so each tree is independent of the others and of build order.

    :param x: n x d matrix
    :param y: labels in {-1, +1}
    :param params:
    :param seed:
    :return: fitted forest
    """
    x, y = check_training_data(x, y)
    n, d = x.shape
    if params.max_features > d:
        raise DomainError(f"max_features={params.max_features} exceeds the {d} features")
    t = (y > 0).astype(float)
    trees, importances = [], np.zeros(d)
    for index in range(params.n_trees):
        rng = get_rng(seed ^ index)
        rows = rng.integers(0, n, size=n)
        builder = _TreeBuilder(x, t, params, rng, n)
        trees.append(builder.grow(rows, 0))
        importances += builder.importances
    importances /= params.n_trees
    total = importances.sum()
    if total > 0:
        importances = importances / total
    else:
        logger.info("no tree made a split, feature importances are uniform")
        importances = np.full(d, 1.0 / d)
    return RandomForestClassifier(params, seed, d, trees, importances)


def rf_feature_importances(classifier: Classifier) -> np.ndarray:
    """
    Mean decrease in Gini impurity per feature, averaged over trees and normalized to sum to 1.

    :param classifier: a fitted forest
    :return: one importance per feature
    """
    if not isinstance(classifier, RandomForestClassifier):
        raise DomainError(f"feature importances need a forest, got {classifier.family.value}")
    return classifier.importances.copy()
