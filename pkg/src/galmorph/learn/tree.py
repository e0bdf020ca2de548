"""C4.5-style decision trees on continuous features.

Splits are binary thresholds ``x <= t`` at midpoints between adjacent
distinct training values. The split is the candidate with the highest gain
ratio among those whose information gain is at least the average gain of
all candidates (Quinlan's guard against tiny split-info denominators).
Pruning is pessimistic subtree replacement with the usual binomial upper
confidence bound on the leaf error rate.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

from galmorph import CLASSES
from galmorph.learn.base import LabeledDataset, TrainedModel, register

_K = len(CLASSES)
_TIE = 1e-12


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits of each row of class counts."""
    n = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, counts / np.where(n > 0, n, 1), 0.0)
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def _feature_candidates(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """(thresholds, gains, gain_ratios) for every admissible cut of one feature."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    onehot = np.zeros((x.size, _K))
    onehot[np.arange(x.size), y[order]] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]  # left counts after cutting behind position i
    total = onehot.sum(axis=0)
    n = float(x.size)
    nl = np.arange(1, x.size, dtype=np.float64)
    nr = n - nl
    ok = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not ok.any():
        empty = np.zeros(0)
        return empty, empty, empty
    left = left[ok]
    right = total - left
    nl, nr = nl[ok], nr[ok]
    parent = _entropy_rows(total[None, :])[0]
    gain = parent - (nl * _entropy_rows(left) + nr * _entropy_rows(right)) / n
    split_info = _entropy_rows(np.stack([nl, nr], axis=1))
    ratio = gain / split_info
    lo = xs[:-1][ok]
    hi = xs[1:][ok]
    thr = (lo + hi) / 2.0
    # keep x <= t exactly equivalent to "x is on the low side"
    thr = np.where(thr < hi, thr, lo)
    return thr, gain, ratio


def _best_split(X, y, features, min_leaf):
    """Best (feature, threshold) among ``features`` or None when nothing helps."""
    cands = []
    for f in features:
        thr, gain, ratio = _feature_candidates(X[:, f], y, min_leaf)
        if thr.size:
            cands.append((f, thr, gain, ratio))
    if not cands:
        return None
    all_gain = np.concatenate([c[2] for c in cands])
    if all_gain.max() <= _TIE:
        return None
    floor = all_gain.mean() - _TIE
    best = None  # (ratio, feature, threshold)
    for f, thr, gain, ratio in sorted(cands, key=lambda c: c[0]):
        eligible = (gain >= floor) & (gain > _TIE)
        if not eligible.any():
            continue
        r = np.where(eligible, ratio, -np.inf)
        top = r.max()
        # lowest threshold among the (near-)ties within this feature
        i = int(np.flatnonzero(r >= top - _TIE)[np.argmin(thr[r >= top - _TIE])])
        if best is None or top > best[0] + _TIE:
            best = (float(top), int(f), float(thr[i]))
    return None if best is None else (best[1], best[2])


class _Builder:
    def __init__(self, X, y, min_leaf, max_features=None, rng=None):
        self.X, self.y = X, y
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng
        self.feature, self.threshold, self.left, self.right, self.counts = [], [], [], [], []

    def _new(self, counts):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append(counts)
        return len(self.feature) - 1

    def _choose(self, idx):
        X, y = self.X[idx], self.y[idx]
        F = X.shape[1]
        if self.max_features is None or self.max_features >= F:
            return _best_split(X, y, range(F), self.min_leaf)
        perm = self.rng.permutation(F)
        k = self.max_features
        split = _best_split(X, y, perm[:k], self.min_leaf)
        # like a random tree: keep drawing features until one of them splits
        while split is None and k < F:
            split = _best_split(X, y, perm[k : k + 1], self.min_leaf)
            k += 1
        return split

    def grow(self, idx):
        counts = np.bincount(self.y[idx], minlength=_K)
        node = self._new(counts)
        if np.count_nonzero(counts) <= 1 or idx.size < 2 * self.min_leaf:
            return node
        split = self._choose(idx)
        if split is None:
            return node
        f, t = split
        go_left = self.X[idx, f] <= t
        self.feature[node] = f
        self.threshold[node] = t
        self.left[node] = self.grow(idx[go_left])
        self.right[node] = self.grow(idx[~go_left])
        return node


def add_errors(n: float, e: float, cf: float) -> float:
    """Extra pessimistic errors for a leaf with ``e`` errors out of ``n`` cases.

    Upper limit of the binomial error rate at confidence ``cf``, times
    ``n``, minus ``e`` (the normal approximation used by C4.5).
    """
    if cf > 0.5 - 1e-12:
        return 0.0
    if e < 1.0:
        base = n * (1.0 - math.exp(math.log(cf) / n))
        return base if e == 0 else base + e * (add_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


@register
class TreeModel(TrainedModel):
    """Flat-array binary tree; leaves carry training class counts."""

    algorithm = "c45"

    def __init__(self, n_features, feature, threshold, left, right, counts, degenerate=False):
        super().__init__(n_features)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, _K)
        self.value = np.argmax(self.counts, axis=1)  # first max == class order tie-break
        self.degenerate = bool(degenerate)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def depth(self) -> int:
        def d(i):
            return 0 if self.feature[i] < 0 else 1 + max(d(self.left[i]), d(self.right[i]))

        return d(0)

    def _predict(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            n = node[rows]
            go_left = X[rows, self.feature[n]] <= self.threshold[n]
            node[rows] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] >= 0
        return self.value[node]

    def _state(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
            "degenerate": self.degenerate,
        }

    @classmethod
    def _from_state(cls, n_features, s):
        return cls(n_features, s["feature"], s["threshold"], s["left"], s["right"], s["counts"], s["degenerate"])


def _prune(b: _Builder, cf: float) -> None:
    """Bottom-up subtree replacement, in place on the builder arrays."""

    def visit(i):
        counts = b.counts[i]
        n = float(counts.sum())
        leaf_e = n - float(counts.max())
        leaf_est = leaf_e + add_errors(n, leaf_e, cf)
        if b.feature[i] < 0:
            return leaf_est
        sub_est = visit(b.left[i]) + visit(b.right[i])
        if leaf_est <= sub_est + 0.1:
            b.feature[i] = -1
            return leaf_est
        return sub_est

    visit(0)


def _compact(b: _Builder, n_features: int, degenerate: bool) -> TreeModel:
    """Drop nodes orphaned by pruning and renumber in pre-order."""
    feature, threshold, left, right, counts = [], [], [], [], []

    def copy(i):
        j = len(feature)
        feature.append(b.feature[i])
        threshold.append(b.threshold[i] if b.feature[i] >= 0 else 0.0)
        left.append(-1)
        right.append(-1)
        counts.append(b.counts[i])
        if b.feature[i] >= 0:
            left[j] = copy(b.left[i])
            right[j] = copy(b.right[i])
        return j

    copy(0)
    return TreeModel(n_features, feature, threshold, left, right, counts, degenerate)


def build_tree(X, y, min_leaf=2, max_features=None, rng=None, prune_cf=None) -> TreeModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    b = _Builder(X, y, int(min_leaf), max_features, rng)
    b.grow(np.arange(X.shape[0]))
    if prune_cf is not None:
        _prune(b, float(prune_cf))
    degenerate = np.count_nonzero(np.bincount(y, minlength=_K)) < 2
    return _compact(b, X.shape[1], degenerate)


def train_c45(data: LabeledDataset, params=None, seed=None) -> TreeModel:
    """Pruned C4.5-style tree.

    params: ``min_leaf`` (default 2), ``confidence`` (pruning CF, default
    0.25, ``None`` disables pruning). A single-class training set gives a
    one-leaf model with ``degenerate`` set.
    """
    params = dict(params or {})
    cf = params.get("confidence", 0.25)
    return build_tree(data.features, data.y, min_leaf=params.get("min_leaf", 2), prune_cf=cf)

