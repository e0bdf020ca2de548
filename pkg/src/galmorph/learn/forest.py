"""Random forest of unpruned gain-ratio trees."""

from __future__ import annotations

import math

import numpy as np

from galmorph import CLASSES
from galmorph.learn.base import LabeledDataset, TrainedModel, register
from galmorph.learn.tree import TreeModel, build_tree


@register
class ForestModel(TrainedModel):
    algorithm = "rf"

    def __init__(self, n_features: int, trees: list[TreeModel]):
        super().__init__(n_features)
        self.trees = list(trees)

    def _predict(self, X):
        votes = np.zeros((X.shape[0], len(CLASSES)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree._predict(X)] += 1
        return np.argmax(votes, axis=1)  # ties -> earlier class

    def _state(self):
        return {"trees": [t._state() for t in self.trees]}

    @classmethod
    def _from_state(cls, n_features, s):
        return cls(n_features, [TreeModel._from_state(n_features, t) for t in s["trees"]])


def train_forest(data: LabeledDataset, params=None, seed=0) -> ForestModel:
    """Bagged random-subspace trees.

    params: ``trees`` (100), ``max_features`` (ceil(sqrt(F))), ``min_leaf``
    (1), ``bootstrap`` (True; False trains every tree on the data as is).
    Tree ``i`` draws from ``default_rng(seed + i)``.
    """
    params = dict(params or {})
    n_trees = int(params.get("trees", 100))
    if n_trees < 1:
        raise ValueError(f"forest needs at least one tree, got {n_trees}")
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    F = data.n_features
    k = int(params.get("max_features") or math.ceil(math.sqrt(F)))
    min_leaf = int(params.get("min_leaf", 1))
    bootstrap = bool(params.get("bootstrap", True))
    X, y = data.features, data.y
    M = X.shape[0]
    seed = 0 if seed is None else int(seed)
    trees = []
    for i in range(n_trees):
        rng = np.random.default_rng(seed + i)
        idx = rng.integers(0, M, size=M) if bootstrap else np.arange(M)
        trees.append(build_tree(X[idx], y[idx], min_leaf=min_leaf, max_features=k, rng=rng))
    return ForestModel(F, trees)
