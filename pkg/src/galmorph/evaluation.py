"""Repeated k-fold cross-validation, confusion matrices and accuracy grids."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from galmorph import CLASSES
from galmorph.errors import TrainingError
from galmorph.learn import TRAINERS, LabeledDataset, TrainedModel
from galmorph.learn.base import CLASS_INDEX

DEFAULT_FOLDS = 10
DEFAULT_RUNS = 5
DEFAULT_SEED = 42


class FoldTrainingError(TrainingError):
    def __init__(self, run: int, fold: int, cause: Exception):
        super().__init__(f"training failed in run {run}, fold {fold}: {cause}")
        self.run = run
        self.fold = fold


@dataclass(frozen=True)
class FoldPlan:
    run_seed: int
    assignment: tuple[int, ...]  # fold id per item
    k: int
    stratified: bool

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignment) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignment) != fold)

    def fold_sizes(self) -> list[int]:
        return np.bincount(np.asarray(self.assignment), minlength=self.k).tolist()


def make_folds(labels: Sequence[str], k: int = DEFAULT_FOLDS, seed: int = DEFAULT_SEED, stratified: bool = True) -> FoldPlan:
    """Seeded fold plan.

    Stratified plans shuffle each class separately and deal its members
    round robin onto the folds, continuing where the previous class
    stopped, so fold sizes differ by at most one both overall and per
    class.
    """
    M = len(labels)
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > M:
        raise ValueError(f"{k} folds requested for only {M} items")
    rng = np.random.default_rng(seed)
    assignment = np.empty(M, dtype=np.int64)
    if stratified:
        codes = np.array([CLASS_INDEX[l] for l in labels])
        offset = 0
        for c in range(len(CLASSES)):
            members = rng.permutation(np.flatnonzero(codes == c))
            assignment[members] = (offset + np.arange(members.size)) % k
            offset += members.size
    else:
        order = rng.permutation(M)
        assignment[order] = np.arange(M) % k
    return FoldPlan(int(seed), tuple(int(a) for a in assignment), int(k), bool(stratified))


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray  # rows true class, columns predicted

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True).reshape(len(CLASSES), len(CLASSES))
        if (c < 0).any():
            raise ValueError("confusion counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        """Overall accuracy in percent."""
        return 100.0 * float(np.trace(self.counts)) / self.total

    def per_class_accuracy(self) -> tuple[float, ...]:
        """Diagonal over row sum, in percent; NaN for classes with no test items."""
        rows = self.counts.sum(axis=1)
        diag = np.diag(self.counts)
        return tuple(100.0 * float(d) / float(r) if r else float("nan") for d, r in zip(diag, rows))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\predicted", *CLASSES, "accuracy_percent"])
        for name, row, acc in zip(CLASSES, self.counts, self.per_class_accuracy()):
            w.writerow([name, *(int(v) for v in row), repr(acc)])
        return buf.getvalue()


def confusion(preds: Sequence[str], truth: Sequence[str]) -> ConfusionMatrix:
    if len(preds) != len(truth):
        raise ValueError(f"{len(preds)} predictions for {len(truth)} true labels")
    counts = np.zeros((len(CLASSES), len(CLASSES)), dtype=np.int64)
    for p, t in zip(preds, truth):
        counts[CLASS_INDEX[t], CLASS_INDEX[p]] += 1
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class EvalReport:
    algorithm: str
    features: str  # feature configuration label
    n_features: int
    run_accuracies: tuple[float, ...]  # percent
    confusion: ConfusionMatrix  # pooled over all runs
    k: int = DEFAULT_FOLDS
    seeds: tuple[int, ...] = field(default=())

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.run_accuracies))

    def per_class_accuracy(self) -> tuple[float, ...]:
        return self.confusion.per_class_accuracy()


def _resolve(algorithm) -> tuple[str, Callable]:
    if callable(algorithm):
        return getattr(algorithm, "__name__", "custom"), algorithm
    if algorithm not in TRAINERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {sorted(TRAINERS)}")
    return algorithm, TRAINERS[algorithm]


def fold_seed(run_seed: int, fold: int, k: int) -> int:
    return int(run_seed) * int(k) + int(fold)


def fit_fold(data: LabeledDataset, plan: FoldPlan, fold: int, algorithm, params=None) -> TrainedModel:
    """Train on every fold except ``fold``. Scaling is fitted inside the trainer."""
    _, trainer = _resolve(algorithm)
    train = data.subset(plan.train_indices(fold))
    return trainer(train, params, seed=fold_seed(plan.run_seed, fold, plan.k))


def cross_validate(
    data: LabeledDataset,
    algorithm,
    params=None,
    k: int = DEFAULT_FOLDS,
    runs: int = DEFAULT_RUNS,
    base_seed: int = DEFAULT_SEED,
    stratified: bool = True,
    features: str = "",
) -> EvalReport:
    """``runs`` repetitions of k-fold CV with run seeds ``base_seed + r``.

    A run's accuracy is its correct predictions over all items (every item
    is tested exactly once per run).
    """
    name, _ = _resolve(algorithm)
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    labels = data.labels
    pooled = ConfusionMatrix(np.zeros((len(CLASSES), len(CLASSES))))
    accs, seeds = [], []
    for r in range(runs):
        seed = base_seed + r
        plan = make_folds(labels, k, seed, stratified)
        preds: list[str | None] = [None] * len(data)
        for f in range(k):
            test = plan.test_indices(f)
            try:
                model = fit_fold(data, plan, f, algorithm, params)
            except (TrainingError, ValueError) as exc:
                raise FoldTrainingError(r, f, exc) from exc
            for i, p in zip(test, model.predict(data.features[test])):
                preds[i] = p
        cm = confusion(preds, labels)
        pooled = pooled + cm
        accs.append(cm.accuracy)
        seeds.append(seed)
    return EvalReport(name, features, data.n_features, tuple(accs), pooled, k, tuple(seeds))


@dataclass(frozen=True)
class AccuracyGrid:
    """Algorithms x feature configurations, with a per-column mean row."""

    algorithms: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[float, ...], ...]  # NaN where no report exists

    def column_means(self) -> tuple[float, ...]:
        arr = np.array(self.cells, dtype=np.float64).reshape(len(self.algorithms), len(self.columns))
        out = []
        for j in range(arr.shape[1]):
            col = arr[:, j][~np.isnan(arr[:, j])]
            out.append(float(col.mean()) if col.size else float("nan"))
        return tuple(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", *self.columns])
        for name, row in zip(self.algorithms, self.cells):
            w.writerow([name, *(repr(float(v)) for v in row)])
        w.writerow(["mean", *(repr(v) for v in self.column_means())])
        return buf.getvalue()

    def to_text(self, decimals: int = 2) -> str:
        header = ["algorithm", *self.columns]
        body = [[a, *(f"{v:.{decimals}f}" for v in row)] for a, row in zip(self.algorithms, self.cells)]
        body.append(["mean", *(f"{v:.{decimals}f}" for v in self.column_means())])
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]

        def line(r):
            return "  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(r))

        rule = "-" * len(line(header))
        return "\n".join([line(header), rule, *(line(r) for r in body[:-1]), rule, line(body[-1])]) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "AccuracyGrid":
        rows = list(csv.reader(io.StringIO(text)))
        columns = tuple(rows[0][1:])
        body = [r for r in rows[1:] if r and r[0] != "mean"]
        return cls(
            tuple(r[0] for r in body),
            columns,
            tuple(tuple(float(v) for v in r[1:]) for r in body),
        )


def report_tables(reports: Sequence[EvalReport]) -> AccuracyGrid:
    """Mean-accuracy grid keyed by (algorithm, feature configuration) in first-seen order."""
    algorithms: list[str] = []
    columns: list[str] = []
    values = {}
    for rep in reports:
        col = rep.features or f"{rep.n_features} features"
        if rep.algorithm not in algorithms:
            algorithms.append(rep.algorithm)
        if col not in columns:
            columns.append(col)
        values[(rep.algorithm, col)] = rep.mean_accuracy
    cells = tuple(tuple(values.get((a, c), float("nan")) for c in columns) for a in algorithms)
    return AccuracyGrid(tuple(algorithms), tuple(columns), cells)


def best_per_class(reports: Sequence[EvalReport]) -> list[tuple[str, EvalReport]]:
    """For each class, the report with the highest per-class accuracy (first wins ties)."""
    out = []
    for ci, name in enumerate(CLASSES):
        best = None
        for rep in reports:
            acc = rep.per_class_accuracy()[ci]
            if np.isnan(acc):
                continue
            if best is None or acc > best.per_class_accuracy()[ci]:
                best = rep
        if best is not None:
            out.append((name, best))
    return out
