"""Distance-weighted k nearest neighbours on z-scored features."""

from __future__ import annotations

import numpy as np

from galmorph import CLASSES
from galmorph.learn.base import LabeledDataset, Standardizer, TrainedModel, register


@register
class KnnModel(TrainedModel):
    """Stores the scaled training set; votes are weighted by 1 / d**2."""

    algorithm = "knn"

    def __init__(self, n_features, scaler: Standardizer, X: np.ndarray, y: np.ndarray, k: int):
        super().__init__(n_features)
        self.scaler = scaler
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.k = int(k)

    def _predict(self, X):
        Q = self.scaler.transform(X)
        out = np.empty(Q.shape[0], dtype=np.int64)
        for i, q in enumerate(Q):
            out[i] = self._vote(np.sqrt(((self.X - q) ** 2).sum(axis=1)))
        return out

    def _vote(self, d: np.ndarray) -> int:
        nearest = np.argsort(d, kind="stable")[: self.k]  # distance ties -> lower training index
        dn, yn = d[nearest], self.y[nearest]
        exact = dn == 0.0
        if exact.any():
            return int(np.argmax(np.bincount(yn[exact], minlength=len(CLASSES))))
        w = np.bincount(yn, weights=1.0 / dn**2, minlength=len(CLASSES))
        return int(np.argmax(w))

    def _state(self):
        return {"scaler": self.scaler.to_dict(), "X": self.X.tolist(), "y": self.y.tolist(), "k": self.k}

    @classmethod
    def _from_state(cls, n_features, s):
        X = np.asarray(s["X"], dtype=np.float64).reshape(-1, n_features)
        return cls(n_features, Standardizer.from_dict(s["scaler"]), X, s["y"], s["k"])


def train_knn(data: LabeledDataset, params=None, seed=None) -> KnnModel:
    """params: ``k`` (default 3, capped at the training size)."""
    params = dict(params or {})
    if len(data) == 0:
        raise ValueError("k-NN needs a nonempty training set")
    k = int(params.get("k", 3))
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, len(data))
    scaler = Standardizer.fit(data.features)
    return KnnModel(data.n_features, scaler, scaler.transform(data.features), data.y, k)


def knn_predict(train: LabeledDataset, query, k: int = 3) -> str:
    if k > len(train):
        raise ValueError(f"k={k} exceeds the training size {len(train)}")
    return train_knn(train, {"k": k}).predict(np.asarray(query, dtype=np.float64)[None, :])[0]
