"""Classifiers used by the evaluation harness: random forest and linear SVM."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Sample:
    """One training/evaluation item: feature vector, class id, fold group id."""

    features: tuple
    label: int
    group: int


from .forest import (  # noqa: E402
    ForestConfig,
    ForestModel,
    forest_from_json,
    forest_to_json,
    rf_predict,
    rf_train,
)
from .svm import SvmConfig, SvmModel, svm_from_json, svm_predict, svm_to_json, svm_train  # noqa: E402

__all__ = [
    "ForestConfig",
    "ForestModel",
    "Sample",
    "SvmConfig",
    "SvmModel",
    "forest_from_json",
    "forest_to_json",
    "rf_predict",
    "rf_train",
    "svm_from_json",
    "svm_predict",
    "svm_to_json",
    "svm_train",
]
