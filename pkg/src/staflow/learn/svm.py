"""One-vs-rest linear SVM trained by cyclic dual coordinate descent on the
hinge loss. Deterministic: samples are visited in a fixed order, so repeated
runs produce identical models.
"""

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClass
from .forest import samples_to_arrays

DEFAULT_MAX_ITERATIONS = 100_000
DEFAULT_TOLERANCE = 1e-12


@dataclass
class SvmConfig:
    c: float = 1.0
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    tolerance: float = DEFAULT_TOLERANCE


@dataclass
class SvmModel:
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)

    @property
    def n_classes(self):
        return self.weights.shape[0]

    @property
    def n_features(self):
        return self.weights.shape[1]


def _train_binary(x_aug, y_signed, c, max_iterations, tolerance):
    """Dual coordinate descent for min 0.5||w||^2 + c*sum(hinge); the bias is
    the last (augmented) feature. One iteration = one pass over the data."""
    n = x_aug.shape[0]
    sq_norms = np.einsum("ij,ij->i", x_aug, x_aug)
    alpha = np.zeros(n)
    w = np.zeros(x_aug.shape[1])
    prev_objective = None
    for _ in range(max_iterations):
        changed = False
        for i in range(n):
            grad = y_signed[i] * (w @ x_aug[i]) - 1.0
            if alpha[i] <= 0.0 and grad >= 0.0:
                continue
            if alpha[i] >= c and grad <= 0.0:
                continue
            new_alpha = min(max(alpha[i] - grad / sq_norms[i], 0.0), c)
            if new_alpha != alpha[i]:
                w = w + (new_alpha - alpha[i]) * y_signed[i] * x_aug[i]
                alpha[i] = new_alpha
                changed = True
        margins = y_signed * (x_aug @ w)
        objective = 0.5 * (w @ w) + c * np.maximum(0.0, 1.0 - margins).sum()
        if prev_objective is not None and abs(prev_objective - objective) < tolerance:
            break
        prev_objective = objective
        if not changed:
            break
    return w


def svm_train(samples, c=1.0, max_iterations=DEFAULT_MAX_ITERATIONS, tolerance=DEFAULT_TOLERANCE):
    """One-vs-rest training; stops each subproblem at max_iterations passes or
    when the objective change drops below tolerance."""
    x_mat, y = samples_to_arrays(samples)
    classes = int(y.max()) + 1
    if len(np.unique(y)) < 2:
        raise SingleClass("training needs at least two distinct labels")

    x_aug = np.hstack([x_mat, np.ones((x_mat.shape[0], 1))])
    weights = np.zeros((classes, x_mat.shape[1]))
    bias = np.zeros(classes)
    for cls in range(classes):
        y_signed = np.where(y == cls, 1.0, -1.0)
        w_aug = _train_binary(x_aug, y_signed, c, max_iterations, tolerance)
        weights[cls] = w_aug[:-1]
        bias[cls] = w_aug[-1]
    return SvmModel(weights=weights, bias=bias)


def svm_predict(model, features):
    """argmax of per-class scores w'x + b; ties break toward the lowest class id."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise DimensionMismatch(f"probe has {x.shape} features, model expects {model.n_features}")
    return int(np.argmax(model.weights @ x + model.bias))


def svm_to_json(model):
    return json.dumps(
        {
            "kind": "linear_svm_ovr",
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
        }
    )


def svm_from_json(text):
    doc = json.loads(text)
    return SvmModel(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        bias=np.asarray(doc["bias"], dtype=np.float64),
    )
