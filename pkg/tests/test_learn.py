import numpy as np
import pytest

from staflow.errors import DimensionMismatch, Empty, InconsistentDimensions, SingleClass
from staflow.learn import (
    ForestConfig,
    Sample,
    forest_from_json,
    forest_to_json,
    rf_predict,
    rf_train,
    svm_from_json,
    svm_predict,
    svm_to_json,
    svm_train,
)
from staflow.learn.forest import ForestModel, _Tree


def make_samples(x_mat, labels, groups=None):
    groups = groups if groups is not None else [0] * len(labels)
    return [
        Sample(features=tuple(row), label=int(lbl), group=int(grp))
        for row, lbl, grp in zip(np.asarray(x_mat), labels, groups)
    ]


def xor_dataset(n_per_cluster=100, seed=0):
    rng = np.random.default_rng(seed)
    centers = [((0, 0), 0), ((4, 4), 0), ((0, 4), 1), ((4, 0), 1)]
    x_rows, y = [], []
    for (cx, cy), label in centers:
        pts = rng.normal(loc=(cx, cy), scale=0.4, size=(n_per_cluster, 2))
        x_rows.append(pts)
        y += [label] * n_per_cluster
    return np.vstack(x_rows), np.asarray(y)


def clusters_on_circle(n_classes, n_per_class=40, radius=10.0, seed=1):
    rng = np.random.default_rng(seed)
    x_rows, y = [], []
    for cls in range(n_classes):
        angle = 2 * np.pi * cls / n_classes
        center = (radius * np.cos(angle), radius * np.sin(angle))
        x_rows.append(rng.normal(loc=center, scale=0.5, size=(n_per_class, 2)))
        y += [cls] * n_per_class
    return np.vstack(x_rows), np.asarray(y)


class TestForest:
    def test_single_class_always_predicted(self):
        samples = make_samples(np.random.default_rng(0).normal(size=(20, 3)), [2] * 20)
        model = rf_train(samples, ForestConfig(n_trees=5, seed=0))
        for s in samples[:5]:
            label, votes = rf_predict(model, s.features)
            assert label == 2
            assert votes.sum() == 5

    def test_xor_training_accuracy(self):
        x_mat, y = xor_dataset()
        samples = make_samples(x_mat, y)
        model = rf_train(samples, ForestConfig(n_trees=50, max_depth=6, seed=3))
        correct = sum(rf_predict(model, s.features)[0] == s.label for s in samples)
        assert correct / len(samples) >= 0.95

    def test_deterministic_same_seed(self):
        x_mat, y = xor_dataset(n_per_cluster=30, seed=5)
        samples = make_samples(x_mat, y)
        probes = np.random.default_rng(6).normal(loc=2, scale=2, size=(25, 2))
        model_a = rf_train(samples, ForestConfig(n_trees=20, seed=9))
        model_b = rf_train(samples, ForestConfig(n_trees=20, seed=9))
        preds_a = [rf_predict(model_a, p) for p in probes]
        preds_b = [rf_predict(model_b, p) for p in probes]
        assert all(la == lb and np.array_equal(va, vb) for (la, va), (lb, vb) in zip(preds_a, preds_b))

    def test_full_dimension_unlimited_depth_fits_consistent_data(self):
        x_mat, y = clusters_on_circle(4, n_per_class=30)
        samples = make_samples(x_mat, y)
        config = ForestConfig(n_trees=60, max_depth=60, n_features_per_split=2, seed=1)
        model = rf_train(samples, config)
        assert all(rf_predict(model, s.features)[0] == s.label for s in samples)

    def test_votes_sum_to_n_trees(self):
        x_mat, y = xor_dataset(n_per_cluster=20, seed=7)
        model = rf_train(make_samples(x_mat, y), ForestConfig(n_trees=13, seed=2))
        _, votes = rf_predict(model, x_mat[0])
        assert votes.sum() == 13

    def test_engineered_tie_breaks_low(self):
        # two single-leaf trees voting class 2 and class 1 -> tie -> class 1
        def leaf_tree(counts):
            tree = _Tree()
            tree.add_node()
            tree.counts[0] = np.asarray(counts)
            return tree

        model = ForestModel(
            trees=[leaf_tree([0, 0, 5]), leaf_tree([0, 5, 0])],
            n_classes=3,
            n_features=2,
            config=ForestConfig(n_trees=2),
        )
        label, votes = rf_predict(model, np.zeros(2))
        assert votes.tolist() == [0, 1, 1]
        assert label == 1

    def test_empty_and_ragged_inputs(self):
        with pytest.raises(Empty):
            rf_train([], ForestConfig())
        bad = [Sample(features=(1.0, 2.0), label=0, group=0), Sample(features=(1.0,), label=1, group=0)]
        with pytest.raises(InconsistentDimensions):
            rf_train(bad, ForestConfig())

    def test_predict_dimension_mismatch(self):
        x_mat, y = xor_dataset(n_per_cluster=10)
        model = rf_train(make_samples(x_mat, y), ForestConfig(n_trees=3, seed=0))
        with pytest.raises(DimensionMismatch):
            rf_predict(model, np.zeros(5))

    def test_json_roundtrip(self):
        x_mat, y = xor_dataset(n_per_cluster=15, seed=8)
        model = rf_train(make_samples(x_mat, y), ForestConfig(n_trees=4, seed=4))
        again = forest_from_json(forest_to_json(model))
        probes = np.random.default_rng(3).normal(size=(10, 2))
        for p in probes:
            la, va = rf_predict(model, p)
            lb, vb = rf_predict(again, p)
            assert la == lb and np.array_equal(va, vb)


class TestSvm:
    def test_two_separable_clusters(self):
        rng = np.random.default_rng(0)
        a = rng.normal(loc=(-3, 0), scale=0.5, size=(50, 2))
        b = rng.normal(loc=(3, 0), scale=0.5, size=(50, 2))
        samples = make_samples(np.vstack([a, b]), [0] * 50 + [1] * 50)
        model = svm_train(samples, c=1.0)
        assert all(svm_predict(model, s.features) == s.label for s in samples)

    def test_paper_default_termination_values(self):
        import inspect

        sig = inspect.signature(svm_train)
        assert sig.parameters["max_iterations"].default == 100_000
        assert sig.parameters["tolerance"].default == 1e-12

    def test_six_separable_clusters(self):
        x_mat, y = clusters_on_circle(6)
        samples = make_samples(x_mat, y)
        model = svm_train(samples, c=10.0)
        assert all(svm_predict(model, s.features) == s.label for s in samples)

    def test_single_class_rejected(self):
        samples = make_samples(np.zeros((5, 2)), [1] * 5)
        with pytest.raises(SingleClass):
            svm_train(samples)

    def test_zero_model_predicts_class_zero(self):
        from staflow.learn import SvmModel

        model = SvmModel(weights=np.zeros((4, 3)), bias=np.zeros(4))
        assert svm_predict(model, np.ones(3)) == 0

    def test_score_scaling_invariance(self):
        from staflow.learn import SvmModel

        rng = np.random.default_rng(2)
        model = SvmModel(weights=rng.normal(size=(3, 4)), bias=rng.normal(size=3))
        scaled = SvmModel(weights=5.0 * model.weights, bias=5.0 * model.bias)
        for _ in range(20):
            x = rng.normal(size=4)
            assert svm_predict(model, x) == svm_predict(scaled, x)

    def test_deterministic(self):
        x_mat, y = clusters_on_circle(3, n_per_class=20, seed=4)
        samples = make_samples(x_mat, y)
        model_a = svm_train(samples, c=1.0)
        model_b = svm_train(samples, c=1.0)
        assert np.array_equal(model_a.weights, model_b.weights)
        assert np.array_equal(model_a.bias, model_b.bias)

    def test_json_roundtrip(self):
        x_mat, y = clusters_on_circle(3, n_per_class=15, seed=5)
        model = svm_train(make_samples(x_mat, y), c=1.0)
        again = svm_from_json(svm_to_json(model))
        assert np.array_equal(model.weights, again.weights)
        assert np.array_equal(model.bias, again.bias)
