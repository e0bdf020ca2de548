"""Dataset container, model base class and JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from galmorph import CLASSES

FORMAT_VERSION = 1
CLASS_INDEX = {name: i for i, name in enumerate(CLASSES)}

_REGISTRY: dict[str, type["TrainedModel"]] = {}


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with one class label per row.

    Labels are class names from ``CLASSES``; ``y`` gives the integer codes
    in the fixed class order elliptical < spiral < irregular.
    """

    features: np.ndarray
    labels: tuple[str, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError(f"features must be a 2D matrix, got shape {X.shape}")
        labels = tuple(str(l) for l in self.labels)
        if len(labels) != X.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {len(labels)} labels")
        bad = sorted(set(labels) - set(CLASSES))
        if bad:
            raise ValueError(f"unknown class labels {bad}; expected {CLASSES}")
        names = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError(f"{X.shape[1]} feature columns but {len(names)} names")
        if X.shape[0] and np.any(~np.isfinite(X).any(axis=0)):
            raise ValueError("a feature column has no finite values")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def y(self) -> np.ndarray:
        return np.array([CLASS_INDEX[l] for l in self.labels], dtype=np.int64)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.features[idx], tuple(self.labels[i] for i in idx), self.feature_names)

    def columns(self, cols) -> "LabeledDataset":
        cols = list(cols)
        return LabeledDataset(self.features[:, cols], self.labels, tuple(self.feature_names[c] for c in cols))


def register(cls):
    _REGISTRY[cls.algorithm] = cls
    return cls


def majority_class(y: np.ndarray) -> int:
    """Most frequent class code; ties go to the earlier class."""
    return int(np.argmax(np.bincount(y, minlength=len(CLASSES))))


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-scoring fitted on training data only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(mean, std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


class TrainedModel:
    """Common predict / serialize surface for all classifiers."""

    algorithm = "base"

    def __init__(self, n_features: int):
        self.n_features = int(n_features)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature vector contains non-finite values")
        return X

    def predict_codes(self, X) -> np.ndarray:
        return self._predict(self._check(X))

    def predict(self, X) -> list[str]:
        return [CLASSES[c] for c in self.predict_codes(X)]

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _state(self) -> dict:
        raise NotImplementedError

    @classmethod
    def _from_state(cls, n_features: int, state: dict) -> "TrainedModel":
        raise NotImplementedError

    def to_json(self) -> str:
        doc = {
            "format_version": FORMAT_VERSION,
            "algorithm": self.algorithm,
            "n_features": self.n_features,
            "state": self._state(),
        }
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "TrainedModel":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
        cls = _REGISTRY.get(doc.get("algorithm"))
        if cls is None:
            raise ValueError(f"unknown algorithm {doc.get('algorithm')!r}")
        return cls._from_state(doc["n_features"], doc["state"])


@register
class MajorityModel(TrainedModel):
    """Constant predictor: the majority class of the training set."""

    algorithm = "majority"

    def __init__(self, n_features: int, label: int):
        super().__init__(n_features)
        self.label = int(label)

    def _predict(self, X):
        return np.full(X.shape[0], self.label, dtype=np.int64)

    def _state(self):
        return {"label": self.label}

    @classmethod
    def _from_state(cls, n_features, state):
        return cls(n_features, state["label"])


def train_majority(data: LabeledDataset, params=None, seed=None) -> MajorityModel:
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    return MajorityModel(data.n_features, majority_class(data.y))


def predict(model: TrainedModel, features) -> str:
    """Class name for a single feature vector."""
    return model.predict(np.asarray(features, dtype=np.float64)[None, :])[0]
