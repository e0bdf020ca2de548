"""Generalized box-counting dimensions of images.

For a ladder of box sizes ``eps`` each box gets a nonnegative mass. The
normalized masses ``P_i`` give the partition sum ``I(Q, eps) = sum P_i**Q``
and the generalized dimension ``D_Q`` is the least-squares slope of
``ln I`` against ``ln(eps0 / eps)`` divided by ``1 - Q``. At ``Q = 1`` the
entropy form ``sum P_i ln P_i`` is regressed against ``ln(eps / eps0)``.

Two mass definitions are supported:

``binary``
    number of foreground pixels of a mask inside the box.
``gray``
    intensity range (max - min) inside the box, the differential
    box-counting measure. Flat boxes get zero mass and drop out.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from galmorph.errors import DegenerateMeasureError, LadderError
from galmorph.raster import GrayImage
from galmorph.standardize import BinaryMask, binarize

BINARY = "binary"
GRAY = "gray"
MODES = (BINARY, GRAY)
DEFAULT_Q_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)
MIN_LADDER_POINTS = 4
CLAMP_SLACK = 0.05


@dataclass(frozen=True)
class BoxLadder:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(set(sizes)) < MIN_LADDER_POINTS:
            raise LadderError(f"ladder needs at least {MIN_LADDER_POINTS} distinct sizes, got {list(sizes)}")
        if any(a <= b for a, b in zip(sizes, sizes[1:])):
            raise LadderError(f"ladder sizes must be strictly decreasing, got {list(sizes)}")
        if sizes[-1] < 2:
            raise LadderError(f"box sizes must be >= 2, got {sizes[-1]}")

    @property
    def epsilon0(self) -> int:
        return self.sizes[0]

    def check_fits(self, height: int, width: int) -> None:
        if self.epsilon0 > min(height, width) / 2:
            raise LadderError(
                f"largest box {self.epsilon0} exceeds half the smaller image side ({min(height, width)})"
            )


@dataclass(frozen=True)
class BoxMassField:
    epsilon: int
    masses: np.ndarray  # per-box measure, row-major over the box grid
    probabilities: np.ndarray  # normalized positive masses, same order

    @property
    def occupied(self) -> int:
        return int(self.probabilities.size)


@dataclass(frozen=True)
class FractalSpectrum:
    q_values: tuple[float, ...]
    dimensions: tuple[float, ...]
    fit_r2: tuple[float, ...]
    mode: str
    raw_dimensions: tuple[float, ...] = field(default=())
    clamped: bool = False

    def dimension(self, q: float) -> float:
        return self.dimensions[self.q_values.index(float(q))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["q", "d_q", "r2"])
        for q, d, r2 in zip(self.q_values, self.dimensions, self.fit_r2):
            writer.writerow([repr(q), repr(d), repr(r2)])
        return buf.getvalue()


def default_ladder(img: GrayImage | tuple[int, int]) -> BoxLadder:
    """Powers of two from the largest one <= min(h, w) / 2 down to 2."""
    h, w = img.shape if isinstance(img, GrayImage) else img
    side = min(h, w)
    if side < 16:
        raise LadderError(f"image too small for box counting: min side {side} < 16")
    top = 1 << int(math.floor(math.log2(side // 2)))
    sizes = []
    s = top
    while s >= 2:
        sizes.append(s)
        s //= 2
    return BoxLadder(tuple(sizes))


def _block_reduce(values: np.ndarray, eps: int, ufunc) -> np.ndarray:
    """Reduce ``values`` over an origin-anchored eps grid; edge boxes may be partial."""
    h, w = values.shape
    row_starts = np.arange(0, h, eps)
    col_starts = np.arange(0, w, eps)
    return ufunc.reduceat(ufunc.reduceat(values, row_starts, axis=0), col_starts, axis=1)


def _mode_source(img, mask, mode):
    if mode == BINARY:
        if mask is None:
            mask = binarize(img)
        bits = mask.bits if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
        return bits.astype(np.int64)
    if mode == GRAY:
        return np.asarray(img.pixels, dtype=np.int64)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _masses_from_source(source: np.ndarray, eps: int, mode: str, plus_one: bool) -> np.ndarray:
    if mode == BINARY:
        return _block_reduce(source, eps, np.add)
    mass = _block_reduce(source, eps, np.maximum) - _block_reduce(source, eps, np.minimum)
    if plus_one:
        mass = mass + 1
    return mass


def _field(masses: np.ndarray, eps: int, mode: str) -> BoxMassField:
    flat = masses.ravel().astype(np.float64)
    positive = flat[flat > 0]
    total = positive.sum()
    if total <= 0:
        what = "empty mask" if mode == BINARY else "constant image"
        raise DegenerateMeasureError(f"degenerate measure at eps={eps}: {what} gives zero mass in every box")
    return BoxMassField(eps, flat, positive / total)


def box_masses(
    img: GrayImage | None,
    mask: BinaryMask | np.ndarray | None,
    epsilon: int,
    mode: str = GRAY,
    plus_one: bool = False,
) -> BoxMassField:
    """Per-box masses on a grid anchored at pixel (0, 0).

    Binary mode counts mask pixels per box (the mask defaults to the Otsu
    mask of ``img``). Gray mode uses the intensity range in each box;
    ``plus_one`` adds 1 to every range, which occupies every box.
    """
    if epsilon < 2:
        raise LadderError(f"box size must be >= 2, got {epsilon}")
    source = _mode_source(img, mask, mode)
    return _field(_masses_from_source(source, epsilon, mode, plus_one), epsilon, mode)


def partition_sum(field: BoxMassField, q: float) -> float:
    """``sum P_i**q`` over occupied boxes, or ``sum P_i ln P_i`` at q = 1."""
    p = field.probabilities
    if q == 1:
        return float(np.sum(p * np.log(p)))
    if q == 0:
        return float(p.size)
    return float(np.sum(p**q))


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and coefficient of determination."""
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ ym) / sxx
    ss_tot = float(ym @ ym)
    resid = ym - slope * xm
    ss_res = float(resid @ resid)
    if ss_tot <= 1e-300 or ss_res <= 1e-15 * ss_tot:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return slope, r2


def _dimension_from_fields(fields: Sequence[BoxMassField], ladder: BoxLadder, q: float) -> tuple[float, float]:
    eps = np.array(ladder.sizes, dtype=np.float64)
    if q == 1:
        x = np.log(eps / ladder.epsilon0)
        y = np.array([partition_sum(f, 1.0) for f in fields])
        return _linear_fit(x, y)
    x = np.log(ladder.epsilon0 / eps)
    y = np.log([partition_sum(f, q) for f in fields])
    slope, r2 = _linear_fit(x, y)
    return slope / (1.0 - q), r2


def _anchor_sources(source: np.ndarray, multi_offset: bool) -> list[np.ndarray]:
    if not multi_offset:
        return [source]
    # anchoring at each image corner == flipping the image and anchoring at (0, 0)
    return [source, source[:, ::-1], source[::-1, :], source[::-1, ::-1]]


def _spectrum_raw(img, mask, ladder, q_values, mode, plus_one, multi_offset):
    source = _mode_source(img, mask, mode)
    ladder.check_fits(*source.shape)
    per_anchor = []
    for src in _anchor_sources(source, multi_offset):
        fields = [_field(_masses_from_source(src, e, mode, plus_one), e, mode) for e in ladder.sizes]
        per_anchor.append([_dimension_from_fields(fields, ladder, q) for q in q_values])
    dims = [float(np.mean([a[i][0] for a in per_anchor])) for i in range(len(q_values))]
    r2s = [float(np.mean([a[i][1] for a in per_anchor])) for i in range(len(q_values))]
    return dims, r2s


def generalized_dimension(
    img: GrayImage | None,
    mask: BinaryMask | np.ndarray | None,
    ladder: BoxLadder,
    q: float,
    mode: str = GRAY,
    plus_one: bool = False,
    multi_offset: bool = False,
) -> tuple[float, float]:
    """Fitted ``D_Q`` and the r^2 of its log-log regression."""
    dims, r2s = _spectrum_raw(img, mask, ladder, [float(q)], mode, plus_one, multi_offset)
    return dims[0], r2s[0]


def spectrum(
    img: GrayImage,
    q_grid: Sequence[float] = DEFAULT_Q_GRID,
    mode: str = GRAY,
    mask: BinaryMask | np.ndarray | None = None,
    ladder: BoxLadder | None = None,
    plus_one: bool = False,
    multi_offset: bool = False,
) -> FractalSpectrum:
    q_values = tuple(float(q) for q in q_grid)
    if not q_values:
        raise ValueError("q_grid must not be empty")
    if list(q_values) != sorted(q_values):
        raise ValueError(f"q_grid must be sorted ascending, got {list(q_values)}")
    if ladder is None:
        ladder = default_ladder(img.shape if img is not None else np.shape(mask))
    raw, r2s = _spectrum_raw(img, mask, ladder, q_values, mode, plus_one, multi_offset)
    dims = raw
    clamped = False
    if mode == BINARY:
        clamped = any(d < -CLAMP_SLACK or d > 2.0 + CLAMP_SLACK for d in raw)
        dims = [min(2.0, max(0.0, d)) for d in raw]
    return FractalSpectrum(q_values, tuple(dims), tuple(r2s), mode, tuple(raw), clamped)


def fd_feature(img: GrayImage, plus_one: bool = False, multi_offset: bool = False) -> float:
    """Gray-differential D_0 over the default ladder: the FDV classification feature."""
    d0, _ = generalized_dimension(
        img, None, default_ladder(img), 0.0, mode=GRAY, plus_one=plus_one, multi_offset=multi_offset
    )
    return d0
