"""Logistic regression, decision trees, random forest."""

import numpy as np
import pytest
from helpers import separable_fixture

from amlgraph.autodiff import RngState, Tensor, grad_check
from amlgraph.baselines import (
    DecisionTree,
    LogRegParams,
    gini_impurity,
    logreg_predict_proba,
    logreg_train,
    rf_fit,
    rf_predict,
    tree_fit,
    tree_predict_class,
    weighted_binary_cross_entropy,
)
from amlgraph.data import standardize_features
from amlgraph.errors import DegenerateDataError
from amlgraph.metrics import evaluate


class TestLogReg:
    def test_separable_1d(self):
        x = np.array([[-1.0], [-0.8], [1.0], [0.9]])
        y = np.array([0, 0, 1, 1])
        params = logreg_train(x, y, np.ones(4, dtype=bool), epochs=300, lr=0.1)
        rep = evaluate(logreg_predict_proba(params, x), y, np.ones(4, dtype=bool))
        assert rep.accuracy == 1.0

    def test_zero_epochs_predicts_half(self):
        x = np.random.default_rng(0).standard_normal((5, 3))
        params = logreg_train(x, np.array([0, 1, 0, 1, 0]), np.ones(5, dtype=bool), epochs=0)
        probs = logreg_predict_proba(params, x)
        assert np.array_equal(probs, np.full((5, 2), 0.5))

    def test_loss_gradient_matches_finite_differences(self):
        y = np.array([0, 1, 1, 0])
        mask = np.array([True, True, True, False])

        def f(z):
            return weighted_binary_cross_entropy(z, y, (0.3, 0.7), mask)

        rng = np.random.default_rng(1)
        report = grad_check(f, Tensor(rng.standard_normal((4, 1))), h=1e-4, tol=1e-3)
        assert report.passed, report.failures

    def test_single_class_rejected(self):
        x = np.ones((3, 2))
        with pytest.raises(DegenerateDataError):
            logreg_train(x, np.zeros(3, dtype=int), np.ones(3, dtype=bool))

    def test_decision_boundary_standardization_invariance(self):
        ds, masks = separable_fixture(seed=31)
        raw = ds.features.copy()
        scaler = standardize_features(ds, masks)
        params = logreg_train(
            ds.features, ds.label, masks.train_eligible, epochs=120, lr=0.05
        )
        # fold the standardization into the weights: w' = w/std, b' = b - sum(w*mu/std)
        w = params.weights.data[:, 0]
        w_raw = w / scaler.std
        b_raw = params.bias.data[0, 0] - float((w * (scaler.mean / scaler.std)).sum())
        folded = LogRegParams(weights=Tensor(w_raw[:, None]), bias=Tensor([[b_raw]]))
        a = logreg_predict_proba(params, ds.features)
        b = logreg_predict_proba(folded, raw)
        assert np.abs(a - b).max() < 1e-9


class TestGini:
    def test_hand_case(self):
        assert gini_impurity(np.array([3.0, 1.0])) == 0.375

    def test_pure_and_even(self):
        assert gini_impurity(np.array([4.0, 0.0])) == 0.0
        assert gini_impurity(np.array([2.0, 2.0])) == 0.5


def exhaustive_best_split(x, y, samples):
    """Enumerate every (feature, midpoint) split; return the minimal
    unweighted-Gini score. Independent oracle for the greedy chooser."""
    best = np.inf
    for f in range(x.shape[1]):
        vals = np.unique(x[samples, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = 0.5 * (lo + hi)
            left = samples[x[samples, f] <= thr]
            right = samples[x[samples, f] > thr]
            score = (
                left.size * gini_impurity(np.bincount(y[left], minlength=2).astype(float))
                + right.size * gini_impurity(np.bincount(y[right], minlength=2).astype(float))
            ) / samples.size
            best = min(best, score)
    return best


class TestDecisionTree:
    def test_pure_labels_single_leaf(self):
        x = np.random.default_rng(2).standard_normal((6, 3))
        tree = tree_fit(x, np.ones(6, dtype=np.int64), np.arange(6), 3, None, RngState(0))
        assert tree.n_nodes == 1
        assert tree.feature[0] == -1

    def test_xor_depth_two(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0], dtype=np.int64)
        tree = tree_fit(x, y, np.arange(4), 2, 2, RngState(3), class_weights=(0.5, 0.5))
        assert np.array_equal(tree_predict_class(tree, x), y)

    def test_root_split_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((30, 4))
        y = (x[:, 2] > 0.2).astype(np.int64)
        samples = np.arange(30)
        tree = tree_fit(x, y, samples, 4, 1, RngState(5), class_weights=(0.5, 0.5))
        f, thr = int(tree.feature[0]), float(tree.threshold[0])
        left = samples[x[samples, f] <= thr]
        right = samples[x[samples, f] > thr]
        chosen = (
            left.size * gini_impurity(np.bincount(y[left], minlength=2).astype(float))
            + right.size * gini_impurity(np.bincount(y[right], minlength=2).astype(float))
        ) / samples.size
        assert chosen == pytest.approx(exhaustive_best_split(x, y, samples), abs=1e-12)

    def test_thresholds_are_midpoints(self):
        rng = np.random.default_rng(5)
        x = rng.integers(0, 5, (40, 3)).astype(float)
        y = (x[:, 1] >= 2).astype(np.int64)
        tree = tree_fit(x, y, np.arange(40), 3, None, RngState(6))
        for node in range(tree.n_nodes):
            f = tree.feature[node]
            if f < 0:
                continue
            vals = np.unique(x[:, f])
            mids = 0.5 * (vals[:-1] + vals[1:])
            assert np.isclose(mids, tree.threshold[node]).any()

    def test_depth_limit(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((50, 3))
        y = rng.integers(0, 2, 50).astype(np.int64)
        tree = tree_fit(x, y, np.arange(50), 3, 1, RngState(7))
        assert tree.n_nodes <= 3


class TestRandomForest:
    def test_single_tree_no_bootstrap_equals_tree_fit(self):
        ds, masks = separable_fixture(seed=32)
        forest = rf_fit(ds.features, ds.label, masks.train_eligible,
                        n_estimators=1, max_features=50, seed=8, bootstrap=False)
        rows = np.flatnonzero(masks.train_eligible)
        solo = tree_fit(ds.features, ds.label, rows, 50, None,
                        RngState(8).split(0), class_weights=(0.3, 0.7))
        tree = forest.trees[0]
        assert np.array_equal(tree.feature, solo.feature)
        assert np.array_equal(tree.threshold, solo.threshold)
        assert np.array_equal(tree.counts, solo.counts)

    def test_unanimous_probability_one(self):
        ds, masks = separable_fixture(seed=33)
        forest = rf_fit(ds.features, ds.label, masks.train_eligible,
                        n_estimators=5, max_features=50, seed=9)
        probs = rf_predict(forest, ds.features[masks.train_eligible])
        # separable fixture: every tree nails the training rows
        assert set(np.unique(probs)) <= {0.0, 1.0}

    def test_tie_probability_and_licit_break(self):
        leaf0 = DecisionTree(
            feature=np.array([-1]), threshold=np.zeros(1), left=np.array([-1]),
            right=np.array([-1]), counts=np.array([[5.0, 1.0]]),
        )
        leaf1 = DecisionTree(
            feature=np.array([-1]), threshold=np.zeros(1), left=np.array([-1]),
            right=np.array([-1]), counts=np.array([[1.0, 5.0]]),
        )
        forest = rf_fit(np.zeros((2, 1)), np.array([0, 1]), np.ones(2, dtype=bool),
                        n_estimators=2, max_features=1, seed=10)
        forest.trees = [leaf0, leaf1]
        probs = rf_predict(forest, np.zeros((3, 1)))
        assert np.array_equal(probs, np.full((3, 2), 0.5))
        rep = evaluate(probs, np.array([1, 1, 1]), np.ones(3, dtype=bool))
        assert rep.confusion.fn == 3  # ties go licit

    def test_votes_match_manual_tally(self):
        ds, masks = separable_fixture(seed=34)
        forest = rf_fit(ds.features, ds.label, masks.train_eligible,
                        n_estimators=7, max_features=10, seed=11, max_depth=3)
        x = ds.features[:20]
        votes = np.zeros(20)
        for tree in forest.trees:
            votes += tree_predict_class(tree, x)
        assert np.array_equal(rf_predict(forest, x)[:, 1], votes / 7)

    def test_deterministic(self):
        ds, masks = separable_fixture(seed=35)
        a = rf_fit(ds.features, ds.label, masks.train_eligible, n_estimators=3, seed=12)
        b = rf_fit(ds.features, ds.label, masks.train_eligible, n_estimators=3, seed=12)
        for ta, tb in zip(a.trees, b.trees):
            assert np.array_equal(ta.feature, tb.feature)
            assert np.array_equal(ta.threshold, tb.threshold)

    def test_duplicated_tree_predicts_like_one(self):
        ds, masks = separable_fixture(seed=36)
        forest = rf_fit(ds.features, ds.label, masks.train_eligible,
                        n_estimators=1, seed=13, bootstrap=False)
        clones = rf_fit(ds.features, ds.label, masks.train_eligible,
                        n_estimators=1, seed=13, bootstrap=False)
        forest.trees = forest.trees + clones.trees + clones.trees
        single = tree_predict_class(clones.trees[0], ds.features)
        assert np.array_equal(rf_predict(forest, ds.features)[:, 1], single.astype(float))

    def test_train_accuracy_monotone_in_depth(self):
        ds, masks = separable_fixture(seed=37)
        accs = []
        for depth in (1, 2, 4, 8):
            forest = rf_fit(ds.features, ds.label, masks.train_eligible,
                            n_estimators=5, max_features=20, seed=14, max_depth=depth)
            probs = rf_predict(forest, ds.features[masks.train_eligible])
            rep = evaluate(probs, ds.label[masks.train_eligible],
                           np.ones(int(masks.train_eligible.sum()), dtype=bool))
            accs.append(rep.accuracy)
        assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:]))

    def test_separable_fixture_accuracy(self):
        ds, masks = separable_fixture(seed=38)
        forest = rf_fit(ds.features, ds.label, masks.train_eligible, n_estimators=10, seed=15)
        probs = rf_predict(forest, ds.features[masks.train_eligible])
        rep = evaluate(probs, ds.label[masks.train_eligible],
                       np.ones(int(masks.train_eligible.sum()), dtype=bool))
        assert rep.accuracy >= 0.99
