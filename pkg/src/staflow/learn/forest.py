"""Random-forest classifier with deterministic per-tree seed derivation.

Trees are CART-style: bootstrap resample, Gini-impurity splits over a random
feature subset, midpoint thresholds between sorted distinct values. Tree k
draws its randomness from a stream derived from (seed, k), so training is
bit-reproducible and tree-parallel training would equal serial.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, Empty, InconsistentDimensions


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 15
    n_features_per_split: int | None = None  # None -> round(sqrt(n_features))
    seed: int = 0

    def validate(self, n_features):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        k = self.resolved_features(n_features)
        if not 1 <= k <= n_features:
            raise ValueError(f"n_features_per_split {k} outside [1, {n_features}]")

    def resolved_features(self, n_features):
        if self.n_features_per_split is None:
            return max(1, min(n_features, round(n_features**0.5)))
        return self.n_features_per_split


@dataclass
class _Tree:
    # parallel node arrays; feature == -1 marks a leaf
    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    def add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append(None)
        return len(self.feature) - 1

    def leaf_counts(self, x):
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] < self.threshold[node] else self.right[node]
        return self.counts[node]


@dataclass
class ForestModel:
    trees: list
    n_classes: int
    n_features: int
    config: ForestConfig


def _best_split(x_mat, y, indices, feature_ids, n_classes):
    """Minimum weighted-Gini split over the candidate features; None if no
    feature has two distinct values."""
    n = len(indices)
    y_node = y[indices]
    best = None  # (score, feature, threshold)
    for f in feature_ids:
        values = x_mat[indices, f]
        order = np.argsort(values, kind="stable")
        v_sorted = values[order]
        boundaries = np.nonzero(v_sorted[:-1] < v_sorted[1:])[0]
        if boundaries.size == 0:
            continue
        one_hot = np.zeros((n, n_classes))
        one_hot[np.arange(n), y_node[order]] = 1.0
        cum = np.cumsum(one_hot, axis=0)
        left = cum[boundaries]
        right = cum[-1] - left
        n_left = boundaries + 1.0
        n_right = n - n_left
        gini_left = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
        score = (n_left * gini_left + n_right * gini_right) / n
        pos = int(np.argmin(score))
        if best is None or score[pos] < best[0]:
            threshold = 0.5 * (v_sorted[boundaries[pos]] + v_sorted[boundaries[pos] + 1])
            best = (float(score[pos]), int(f), float(threshold))
    return best


def _grow(tree, x_mat, y, indices, depth, rng, n_classes, max_depth, k_features):
    node = tree.add_node()
    counts = np.bincount(y[indices], minlength=n_classes)
    tree.counts[node] = counts
    if depth >= max_depth or np.count_nonzero(counts) <= 1:
        return node
    feature_ids = rng.choice(x_mat.shape[1], size=k_features, replace=False)
    split = _best_split(x_mat, y, indices, feature_ids, n_classes)
    if split is None:
        return node
    _, f, threshold = split
    goes_left = x_mat[indices, f] < threshold
    tree.feature[node] = f
    tree.threshold[node] = threshold
    tree.left[node] = _grow(
        tree, x_mat, y, indices[goes_left], depth + 1, rng, n_classes, max_depth, k_features
    )
    tree.right[node] = _grow(
        tree, x_mat, y, indices[~goes_left], depth + 1, rng, n_classes, max_depth, k_features
    )
    return node


def samples_to_arrays(samples):
    """(X, y) float/int arrays from Sample records; validates consistent dims."""
    if not samples:
        raise Empty("no samples")
    lengths = {len(s.features) for s in samples}
    if len(lengths) != 1:
        raise InconsistentDimensions(f"feature lengths differ: {sorted(lengths)}")
    x_mat = np.asarray([np.asarray(s.features, dtype=np.float64) for s in samples])
    y = np.asarray([s.label for s in samples], dtype=np.int64)
    return x_mat, y


def rf_train(samples, config=None):
    """Grow config.n_trees bootstrap trees; deterministic for a fixed seed."""
    config = config if config is not None else ForestConfig()
    x_mat, y = samples_to_arrays(samples)
    n, d = x_mat.shape
    config.validate(d)
    n_classes = int(y.max()) + 1
    k_features = config.resolved_features(d)

    trees = []
    for tree_idx in range(config.n_trees):
        rng = np.random.default_rng([config.seed, tree_idx])
        bootstrap = rng.integers(0, n, size=n)
        tree = _Tree()
        _grow(tree, x_mat, y, bootstrap, 0, rng, n_classes, config.max_depth, k_features)
        trees.append(tree)
    return ForestModel(trees=trees, n_classes=n_classes, n_features=d, config=config)


def rf_predict(model, features):
    """(label, per-class vote counts); each tree votes its leaf majority,
    all ties break toward the lowest class id."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise DimensionMismatch(f"probe has {x.shape} features, model expects {model.n_features}")
    votes = np.zeros(model.n_classes, dtype=np.int64)
    for tree in model.trees:
        votes[int(np.argmax(tree.leaf_counts(x)))] += 1
    return int(np.argmax(votes)), votes


def forest_to_json(model):
    """Self-describing JSON form including the config and seed, for audit."""
    return json.dumps(
        {
            "kind": "random_forest",
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "config": {
                "n_trees": model.config.n_trees,
                "max_depth": model.config.max_depth,
                "n_features_per_split": model.config.n_features_per_split,
                "seed": model.config.seed,
            },
            "trees": [
                {
                    "feature": [int(f) for f in t.feature],
                    "threshold": [float(x) for x in t.threshold],
                    "left": [int(x) for x in t.left],
                    "right": [int(x) for x in t.right],
                    "counts": [c.tolist() for c in t.counts],
                }
                for t in model.trees
            ],
        }
    )


def forest_from_json(text):
    doc = json.loads(text)
    config = ForestConfig(**doc["config"])
    trees = []
    for td in doc["trees"]:
        tree = _Tree(
            feature=td["feature"],
            threshold=td["threshold"],
            left=td["left"],
            right=td["right"],
            counts=[np.asarray(c, dtype=np.int64) for c in td["counts"]],
        )
        trees.append(tree)
    return ForestModel(
        trees=trees, n_classes=doc["n_classes"], n_features=doc["n_features"], config=config
    )
