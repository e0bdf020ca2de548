"""One-vs-one soft-margin SVMs with the kernel (x.y + 1)**2.

Each binary dual is solved by sequential minimal optimization with
second-order working-set selection, following the LIBSVM solver.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from galmorph import CLASSES
from galmorph.errors import TrainingError
from galmorph.learn.base import LabeledDataset, Standardizer, TrainedModel, register

_TAU = 1e-12


def poly_kernel(A: np.ndarray, B: np.ndarray, degree: int = 2) -> np.ndarray:
    return (A @ B.T + 1.0) ** degree


def smo(K: np.ndarray, y: np.ndarray, C: float = 1.0, tol: float = 1e-3, max_iter: int = 100_000):
    """Minimize 1/2 a'Qa - sum(a) s.t. 0 <= a <= C, y'a = 0 with Q = yy'K.

    Returns ``(alpha, b, iterations)``; the decision function is
    ``sum_i a_i y_i K(x_i, x) + b``. Raises ``TrainingError`` when the
    maximal KKT violation is still >= tol after ``max_iter`` updates.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    for it in range(max_iter + 1):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        g_max = score[i]
        if g_max - score[low].min() < tol:
            break
        if it == max_iter:
            raise TrainingError(f"SMO did not converge within {max_iter} iterations")
        cand = np.flatnonzero(low & (score < g_max))
        b = g_max - score[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, _TAU)
        j = int(cand[np.argmin(-(b * b) / a)])

        ai, aj = alpha[i], alpha[j]
        quad = max(diag[i] + diag[j] - 2.0 * K[i, j], _TAU)
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj

    # bias from free vectors, else the midpoint of the feasible interval
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub_mask = ((y > 0) & (alpha >= C)) | ((y < 0) & (alpha <= 0))
        lb_mask = ((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= C))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, -rho, it


@register
class SvmModel(TrainedModel):
    """Pairwise machines: (class_a, class_b, support X, alpha*y, bias)."""

    algorithm = "svm"

    def __init__(self, n_features, scaler: Standardizer, machines, degree: int = 2):
        super().__init__(n_features)
        self.scaler = scaler
        self.degree = int(degree)
        self.machines = [
            (int(a), int(b), np.asarray(sv, dtype=np.float64).reshape(-1, n_features), np.asarray(coef, dtype=np.float64), float(bias))
            for a, b, sv, coef, bias in machines
        ]

    def decision(self, X) -> np.ndarray:
        """Decision values, one column per class pair; positive favours the lower class."""
        Z = self.scaler.transform(self._check(X))
        cols = [poly_kernel(Z, sv, self.degree) @ coef + bias for _, _, sv, coef, bias in self.machines]
        return np.stack(cols, axis=1) if cols else np.zeros((Z.shape[0], 0))

    def _predict(self, X):
        Z = self.scaler.transform(X)
        votes = np.zeros((X.shape[0], len(CLASSES)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for a, b, sv, coef, bias in self.machines:
            f = poly_kernel(Z, sv, self.degree) @ coef + bias
            votes[rows, np.where(f >= 0, a, b)] += 1
        return np.argmax(votes, axis=1)

    def _state(self):
        return {
            "scaler": self.scaler.to_dict(),
            "degree": self.degree,
            "machines": [
                {"a": a, "b": b, "sv": sv.tolist(), "coef": coef.tolist(), "bias": bias}
                for a, b, sv, coef, bias in self.machines
            ],
        }

    @classmethod
    def _from_state(cls, n_features, s):
        machines = [(m["a"], m["b"], m["sv"], m["coef"], m["bias"]) for m in s["machines"]]
        return cls(n_features, Standardizer.from_dict(s["scaler"]), machines, s["degree"])


def train_svm(data: LabeledDataset, params=None, seed=None, return_duals: bool = False):
    """One-vs-one over the classes present in ``data``.

    params: ``C`` (1.0), ``tol`` (1e-3), ``max_iter`` (1e5), ``degree`` (2).
    With ``return_duals`` the full per-pair ``(alpha, y)`` vectors are
    returned alongside the model for feasibility checks.
    """
    params = dict(params or {})
    C = float(params.get("C", 1.0))
    tol = float(params.get("tol", 1e-3))
    max_iter = int(params.get("max_iter", 100_000))
    degree = int(params.get("degree", 2))
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    scaler = Standardizer.fit(data.features)
    Z = scaler.transform(data.features)
    y = data.y
    present = sorted(set(y.tolist()))
    machines, duals = [], []
    for a, b in combinations(present, 2):
        idx = np.flatnonzero((y == a) | (y == b))
        yy = np.where(y[idx] == a, 1.0, -1.0)
        Zp = Z[idx]
        try:
            alpha, bias, _ = smo(poly_kernel(Zp, Zp, degree), yy, C=C, tol=tol, max_iter=max_iter)
        except TrainingError as exc:
            raise TrainingError(f"{CLASSES[a]} vs {CLASSES[b]}: {exc}") from exc
        sv = alpha > 0
        machines.append((a, b, Zp[sv], alpha[sv] * yy[sv], bias))
        duals.append((alpha, yy))
    if not machines:
        # single class: a constant machine that always votes for it
        only = present[0]
        machines.append((only, only, np.zeros((0, data.n_features)), np.zeros(0), 1.0))
    model = SvmModel(data.n_features, scaler, machines, degree)
    return (model, duals) if return_duals else model
