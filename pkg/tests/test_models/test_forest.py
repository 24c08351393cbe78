"""Tests the random forest."""

import unittest

import numpy as np

from ttpredict.errors import DomainError
from ttpredict.models.forest import (
    ForestParams,
    RandomForestClassifier,
    TreeNode,
    gini_impurity,
    rf_feature_importances,
    rf_fit,
)
from ttpredict.models.logreg import LogRegParams, logreg_fit
from ttpredict.rng import get_rng


def _one_feature_decides(seed: int, n: int = 100, d: int = 4):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    y = np.where(x[:, 0] > 0, 1, -1)
    return x, y


class TestForest(unittest.TestCase):
    def test_gini(self):
        self.assertEqual(0.0, gini_impurity(0, 12))
        self.assertEqual(0.0, gini_impurity(5, 0))
        self.assertEqual(0.5, gini_impurity(3, 3))

    def test_root_split_uses_deciding_feature(self):
        x, y = _one_feature_decides(0, n=40, d=3)
        params = ForestParams(n_trees=25, max_depth=1, max_features=2, min_samples_leaf=1)
        forest = rf_fit(x, y, params, seed=17)
        for index, tree in enumerate(forest.trees):
            rng = get_rng(17 ^ index)
            rng.integers(0, 40, size=40)
            candidates = rng.choice(3, size=2, replace=False).tolist()
            if 0 in candidates:
                self.assertEqual(0, tree.feature, f"tree {index}")
            else:
                self.assertNotEqual(0, tree.feature, f"tree {index}")
            if not tree.is_leaf:
                self.assertTrue(tree.left.is_leaf and tree.right.is_leaf)

    def test_single_feature_importance(self):
        x, y = _one_feature_decides(1, d=1)
        forest = rf_fit(x, y, ForestParams(n_trees=5, max_features=1), seed=0)
        self.assertEqual([1.0], rf_feature_importances(forest).tolist())

    def test_importances_normalized(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(80, 5))
        y = np.where(x[:, 1] - x[:, 3] + rng.normal(size=80) > 0, 1, -1)
        importances = rf_feature_importances(rf_fit(x, y, ForestParams(n_trees=20), seed=3))
        self.assertTrue(np.all(importances >= 0))
        self.assertAlmostEqual(1.0, importances.sum(), delta=1e-9)

    def test_deciding_feature_is_most_important(self):
        params = ForestParams(n_trees=30, max_features=2)
        for seed in range(10):
            x, y = _one_feature_decides(seed)
            importances = rf_feature_importances(rf_fit(x, y, params, seed=seed))
            self.assertEqual(0, int(np.argmax(importances)), f"seed {seed}: {importances}")

    def test_noise_feature_is_unimportant(self):
        params = ForestParams(n_trees=20, max_features=2)
        noise = []
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            x = rng.normal(size=(150, 3))
            y = np.where(x[:, 0] + x[:, 1] > 0, 1, -1)
            noise.append(rf_feature_importances(rf_fit(x, y, params, seed=seed))[2])
        self.assertLess(np.mean(noise), 0.5 / 3)

    def test_unanimous_vote(self):
        trees = [TreeNode(leaf_counts=(0, 3)) for _ in range(3)]
        forest = RandomForestClassifier(ForestParams(), 0, 2, trees, np.array([0.5, 0.5]))
        self.assertEqual((1.0, 1), forest.predict([0.3, -2.0]))

    def test_determinism(self):
        x, y = _one_feature_decides(3)
        params = ForestParams(n_trees=10)
        first, second = rf_fit(x, y, params, seed=9), rf_fit(x, y, params, seed=9)
        self.assertEqual(first.parameters_to_dict(), second.parameters_to_dict())
        self.assertEqual(first.predict_many(x)[0].tolist(), second.predict_many(x)[0].tolist())

    def test_errors(self):
        x, y = _one_feature_decides(4, d=3)
        with self.assertRaises(DomainError):
            rf_fit(x, y, ForestParams(max_features=4))
        with self.assertRaises(DomainError):
            rf_feature_importances(logreg_fit(x, y, LogRegParams()))
