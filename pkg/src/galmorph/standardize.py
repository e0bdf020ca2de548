"""Position, orientation and size normalization of galaxy images.

The pipeline thresholds the image with Otsu's method, finds the centroid
and the scatter matrix of the foreground pixels, rotates the galaxy so its
major axis is horizontal, trims all-background columns at the left and
right margins and stretches the result to a fixed 128x128 frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from galmorph.errors import DegenerateInputError, OrientationError
from galmorph.raster import GrayImage

OUTPUT_SIZE = 128
_ISOTROPY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Foreground mask plus the threshold that produced it."""

    bits: np.ndarray
    threshold: float

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool, copy=True)
        if bits.ndim != 2:
            raise ValueError(f"BinaryMask expects a 2D array, got shape {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class GalaxyMoments:
    centroid_row: float
    centroid_col: float
    cov: np.ndarray  # [[rr, rc], [rc, cc]], unnormalized


def otsu_threshold(pixels: np.ndarray) -> int:
    """Smallest t in 1..255 maximizing between-class variance of ``pixels >= t``.

    Variances are compared exactly as rationals, so ties resolve to the
    lowest threshold independent of float rounding.
    """
    hist = np.bincount(np.asarray(pixels, dtype=np.uint8).ravel(), minlength=256)
    levels = np.arange(256, dtype=np.int64)
    total_n = int(hist.sum())
    total_s = int((hist * levels).sum())
    best_t, best_v = None, Fraction(-1)
    n0 = s0 = 0
    for t in range(1, 256):
        n0 += int(hist[t - 1])
        s0 += int(hist[t - 1]) * (t - 1)
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        # w0 w1 (mu0 - mu1)^2 up to the constant factor 1/N^2
        v = Fraction((n1 * s0 - n0 * s1) ** 2, n0 * n1)
        if v > best_v:
            best_t, best_v = t, v
    if best_t is None:
        raise DegenerateInputError("constant image: no threshold separates foreground from background")
    return best_t


def binarize(img: GrayImage) -> BinaryMask:
    t = otsu_threshold(img.pixels)
    return BinaryMask(img.pixels >= t, float(t))


def galaxy_moments(mask: BinaryMask | np.ndarray) -> GalaxyMoments:
    """Centroid and unnormalized second central moments of the true pixels."""
    bits = mask.bits if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(bits)
    if rows.size == 0:
        raise DegenerateInputError("empty mask: no foreground pixels")
    rows = rows.astype(np.float64)
    cols = cols.astype(np.float64)
    r_bar = rows.mean()
    c_bar = cols.mean()
    dr = rows - r_bar
    dc = cols - c_bar
    rc = float(dr @ dc)
    cov = np.array([[float(dr @ dr), rc], [rc, float(dc @ dc)]])
    return GalaxyMoments(float(r_bar), float(c_bar), cov)


def principal_angle(m: GalaxyMoments | np.ndarray) -> float:
    """Angle of the major axis from the column axis, in (-pi/2, pi/2].

    Positive angles point towards increasing row index.
    """
    cov = m.cov if isinstance(m, GalaxyMoments) else np.asarray(m, dtype=np.float64)
    a, b, c = float(cov[0, 0]), float(cov[0, 1]), float(cov[1, 1])
    if a == 0.0 and b == 0.0 and c == 0.0:
        raise OrientationError("zero covariance: orientation undefined")
    half_tr = 0.5 * (a + c)
    gap = math.hypot(0.5 * (a - c), b)
    lam_max = half_tr + gap
    lam_min = half_tr - gap
    if lam_max - lam_min <= _ISOTROPY_RTOL * max(abs(lam_max), abs(lam_min)):
        return 0.0
    # eigenvector (row, col) for lam_max from whichever matrix row is better conditioned
    if abs(lam_max - c) >= abs(lam_max - a):
        dr, dc = lam_max - c, b
    else:
        dr, dc = b, lam_max - a
    theta = math.atan2(dr, dc)
    if theta <= -math.pi / 2:
        theta += math.pi
    elif theta > math.pi / 2:
        theta -= math.pi
    return theta


def bilinear_sample(values: np.ndarray, rows: np.ndarray, cols: np.ndarray, fill: float = 0.0) -> np.ndarray:
    """Bilinear interpolation at fractional coordinates, ``fill`` outside the grid."""
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    fr = rows - r0
    fc = cols - c0
    out = np.zeros(np.broadcast(rows, cols).shape, dtype=np.float64)
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            rr = r0 + dr
            cc = c0 + dc
            inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
            v = np.where(inside, values[np.clip(rr, 0, h - 1), np.clip(cc, 0, w - 1)], fill)
            out += wr * wc * v
    return out


def rotate_about(
    values: np.ndarray,
    angle: float,
    center: tuple[float, float],
    out_shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Rotate so that direction ``angle`` (from the column axis) becomes horizontal.

    The source point ``center`` lands on the middle of the output canvas.
    """
    values = np.asarray(values, dtype=np.float64)
    if out_shape is None:
        out_shape = values.shape
    oh, ow = out_shape
    out_r = np.arange(oh, dtype=np.float64)[:, None] - (oh - 1) / 2.0
    out_c = np.arange(ow, dtype=np.float64)[None, :] - (ow - 1) / 2.0
    s, co = math.sin(angle), math.cos(angle)
    src_r = center[0] + s * out_c + co * out_r
    src_c = center[1] + co * out_c - s * out_r
    return bilinear_sample(values, src_r, src_c, fill=0.0)


def rotate_image(img: GrayImage, degrees: float) -> GrayImage:
    """Rotate ``img`` about its center by ``degrees`` (counter-clockwise on screen)."""
    h, w = img.shape
    center = ((h - 1) / 2.0, (w - 1) / 2.0)
    # the direction at +degrees (towards increasing row) is mapped onto the column axis
    return GrayImage.from_float(rotate_about(img.pixels, math.radians(degrees), center))


def resize_bilinear(values: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Stretch to ``out_shape`` with pixel-center-aligned bilinear sampling."""
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    oh, ow = out_shape
    rows = (np.arange(oh, dtype=np.float64) + 0.5) * (h / oh) - 0.5
    cols = (np.arange(ow, dtype=np.float64) + 0.5) * (w / ow) - 0.5
    rows = np.clip(rows, 0.0, h - 1)[:, None]
    cols = np.clip(cols, 0.0, w - 1)[None, :]
    return bilinear_sample(values, rows, cols)


def standardize(img: GrayImage, size: int = OUTPUT_SIZE) -> GrayImage:
    """Center, orient and resize a galaxy image to ``size`` x ``size``."""
    mask = binarize(img)
    moments = galaxy_moments(mask)
    theta = principal_angle(moments)

    side = max(img.height, img.width)
    rotated = rotate_about(
        img.pixels, theta, (moments.centroid_row, moments.centroid_col), out_shape=(side, side)
    )
    # keep the original threshold; interpolation haze must not move the mask
    occupied = np.flatnonzero((rotated >= mask.threshold).any(axis=0))
    if occupied.size == 0:
        raise DegenerateInputError("galaxy vanished after rotation")
    # trim background margins only; removing interior gaps would shear multi-clump galaxies
    cropped = rotated[:, occupied[0] : occupied[-1] + 1]
    return GrayImage.from_float(resize_bilinear(cropped, (size, size)))
