"""Classifiers sharing one train / predict / serialize contract."""

from galmorph.learn.base import (
    FORMAT_VERSION,
    LabeledDataset,
    MajorityModel,
    Standardizer,
    TrainedModel,
    predict,
    train_majority,
)
from galmorph.learn.forest import ForestModel, train_forest
from galmorph.learn.knn import KnnModel, knn_predict, train_knn
from galmorph.learn.svm import SvmModel, smo, train_svm
from galmorph.learn.tree import TreeModel, add_errors, build_tree, train_c45

TRAINERS = {
    "c45": train_c45,
    "knn": train_knn,
    "rf": train_forest,
    "svm": train_svm,
    "majority": train_majority,
}
ALGORITHMS = ("c45", "knn", "rf", "svm")


def load_model(text: str) -> TrainedModel:
    return TrainedModel.from_json(text)


__all__ = [
    "ALGORITHMS",
    "FORMAT_VERSION",
    "ForestModel",
    "KnnModel",
    "LabeledDataset",
    "MajorityModel",
    "Standardizer",
    "SvmModel",
    "TRAINERS",
    "TrainedModel",
    "TreeModel",
    "add_errors",
    "build_tree",
    "knn_predict",
    "load_model",
    "predict",
    "smo",
    "train_c45",
    "train_forest",
    "train_knn",
    "train_majority",
    "train_svm",
]
