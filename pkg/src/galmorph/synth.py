"""Deterministic synthetic galaxies for exercising the pipeline.

Profiles are qualitative stand-ins, not astrophysical models:

* elliptical: smooth exponential falloff over elliptical isophotes;
* spiral: exponential disk and bulge, modulated by logarithmic arms;
* irregular: a seeded sum of Gaussian clumps.

Noise is signal dependent (shot-noise like) so the sky stays at zero, and
everything fainter than ``sky_level`` of the peak is cut to black, as in a
sky-subtracted survey cutout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from galmorph import CLASSES
from galmorph.raster import GrayImage, save_image

ELLIPTICAL, SPIRAL, IRREGULAR = CLASSES
DEFAULT_COUNTS = (17, 104, 10)
_MAX_MAJOR = 100.0  # px on a 256 px frame; leaves room for the center offset
# semi-minor axis of the sky-level isophote, px on a 256 px frame
_MINOR_RANGE = {ELLIPTICAL: (40.0, 54.0), SPIRAL: (34.0, 54.0), IRREGULAR: (30.0, 44.0)}


@dataclass(frozen=True)
class SynthParams:
    label: str
    seed: int = 0
    size: int = 256
    rotation: float = 0.0  # radians, positive towards increasing row
    noise: float = 0.05
    brightness: float = 1.0  # >1 saturates the core
    center_offset: tuple[float, float] = (0.0, 0.0)
    sky_level: float = 0.03
    # elliptical / spiral disk
    scale: float = 18.0
    axis_ratio: float = 0.6
    # spiral
    arms: int = 2
    winding: float = 0.35  # tan of the pitch angle
    arm_strength: float = 0.8
    arm_sharpness: float = 2.0
    arm_extent: float = 2.0  # arm fade radius in disk scales
    bulge: float = 0.6
    # irregular
    blobs: int = 5
    spread: float = 30.0
    envelope: float = 0.3

    def __post_init__(self):
        if self.label not in CLASSES:
            raise ValueError(f"unknown class {self.label!r}; expected one of {CLASSES}")
        if not 0.0 < self.axis_ratio <= 1.0:
            raise ValueError(f"axis_ratio must be in (0, 1], got {self.axis_ratio}")
        if self.arms < 1:
            raise ValueError(f"arm count must be >= 1, got {self.arms}")
        if self.blobs < 1:
            raise ValueError(f"blob count must be >= 1, got {self.blobs}")
        if not 0.0 <= self.noise <= 0.2:
            raise ValueError(f"noise amplitude must be in [0, 0.2], got {self.noise}")
        if self.size < 16 or self.scale <= 0 or self.brightness <= 0:
            raise ValueError("size must be >= 16; scale and brightness must be positive")


def _frame(p: SynthParams):
    """Galaxy-frame coordinates: u along the major axis, v across it."""
    idx = np.arange(p.size, dtype=np.float64)
    c = (p.size - 1) / 2.0
    dr = idx[:, None] - (c + p.center_offset[0])
    dc = idx[None, :] - (c + p.center_offset[1])
    s, co = math.sin(p.rotation), math.cos(p.rotation)
    u = co * dc + s * dr
    v = -s * dc + co * dr
    return u, v


def _elliptical(p: SynthParams, rng) -> np.ndarray:
    u, v = _frame(p)
    r = np.sqrt(u**2 + (v / p.axis_ratio) ** 2)
    return np.exp(-r / p.scale)


def _spiral(p: SynthParams, rng) -> np.ndarray:
    u, v = _frame(p)
    v = v / p.axis_ratio
    r = np.hypot(u, v)
    phi = np.arctan2(v, u)
    phase = rng.uniform(0, 2 * np.pi)
    # logarithmic spiral: phi = ln(r) / winding
    arm_phase = p.arms * (phi - np.log(np.maximum(r, 1.0) / p.scale) / p.winding) + phase
    arms = ((1.0 + np.cos(arm_phase)) / 2.0) ** p.arm_sharpness
    disk = np.exp(-r / (1.6 * p.scale))
    bulge = p.bulge * np.exp(-r / (0.25 * p.scale))
    # arms fade before the outer isophote so the disk ellipse sets the outline
    strength = p.arm_strength * np.exp(-((r / (p.arm_extent * p.scale)) ** 2))
    return disk * ((1.0 - strength) + strength * arms) + bulge


def _irregular(p: SynthParams, rng) -> np.ndarray:
    u, v = _frame(p)
    # faint elongated envelope holding the clumps together
    out = p.envelope * np.exp(-np.sqrt(u**2 + (v / p.axis_ratio) ** 2) / p.scale)
    for _ in range(p.blobs):
        cu, cv = np.clip(rng.normal(0.0, 1.0, size=2), -1.2, 1.2) * p.spread * (1.0, p.axis_ratio)
        sigma = rng.uniform(0.12, 0.3) * p.scale + 2.0
        amp = rng.uniform(0.4, 1.0)
        out += amp * np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / (2.0 * sigma**2))
    return out


_PROFILES = {ELLIPTICAL: _elliptical, SPIRAL: _spiral, IRREGULAR: _irregular}


def generate_galaxy(params: SynthParams) -> GrayImage:
    rng = np.random.default_rng(params.seed)
    profile = _PROFILES[params.label](params, rng)
    profile = profile / profile.max()
    noisy = profile + params.noise * np.sqrt(profile) * rng.standard_normal(profile.shape)
    noisy = np.where(profile < params.sky_level, 0.0, noisy)
    scaled = np.clip(noisy * params.brightness, 0.0, 1.0) * 255.0
    return GrayImage.from_float(scaled)


def random_params(label: str, seed: int, size: int = 256) -> SynthParams:
    """Per-item parameters drawn from the documented class ranges.

    Sizes are drawn as the semi-minor axis of the outer (sky-level)
    isophote, in px on a 256 px frame (elliptical U(40, 54), spiral
    U(34, 54), irregular U(30, 44)), and converted to each profile's scale
    length. That keeps the standardized outline between
    the coarsest box-grid lines instead of letting a faint tip straddle one.

    Common: rotation U(-pi/2, pi/2), noise U(0.02, 0.08), brightness
    U(1.0, 1.6), center offset U(-20, 20) px per axis.
    elliptical: axis ratio U(0.45, 0.9).
    spiral: axis ratio U(0.4, 0.75), arms {2, 3}, winding U(0.25, 0.45),
    arm strength U(0.7, 0.95), arm extent U(1.3, 1.8), bulge U(0.3, 0.8).
    irregular: axis ratio U(0.45, 0.75), blobs 3..7, spread U(0.35, 0.6)
    of the major semi-axis, envelope U(0.3, 0.45).
    """
    rng = np.random.default_rng([seed, 0x5EED])
    unit = size / 256.0
    common = dict(
        label=label,
        seed=seed,
        size=size,
        rotation=float(rng.uniform(-np.pi / 2, np.pi / 2)),
        noise=float(rng.uniform(0.02, 0.08)),
        brightness=float(rng.uniform(1.0, 1.6)),
        center_offset=(float(rng.uniform(-20, 20) * unit), float(rng.uniform(-20, 20) * unit)),
    )
    lo, hi = _MINOR_RANGE[label]
    minor = float(rng.uniform(lo, hi)) * unit
    sky = SynthParams.sky_level
    if label == ELLIPTICAL:
        q = float(rng.uniform(0.45, 0.9))
        major = min(minor / q, _MAX_MAJOR * unit)
        return SynthParams(**common, scale=major / math.log(1.0 / sky), axis_ratio=minor / major)
    if label == SPIRAL:
        q = float(rng.uniform(0.4, 0.75))
        major = min(minor / q, _MAX_MAJOR * unit)
        shape = dict(
            arms=int(rng.integers(2, 4)),
            winding=float(rng.uniform(0.25, 0.45)),
            arm_strength=float(rng.uniform(0.7, 0.95)),
            arm_extent=float(rng.uniform(1.3, 1.8)),
            bulge=float(rng.uniform(0.3, 0.8)),
        )
        # outline where the disk falls to sky level relative to disk + bulge peak
        scale = major / (1.6 * math.log(1.0 / (sky * (1.0 + shape["bulge"]))))
        return SynthParams(**common, scale=scale, axis_ratio=minor / major, **shape)
    if label == IRREGULAR:
        q = float(rng.uniform(0.45, 0.75))
        major = min(minor / q, _MAX_MAJOR * unit)
        envelope = float(rng.uniform(0.3, 0.45))
        return SynthParams(
            **common,
            scale=major / math.log(envelope / sky),
            axis_ratio=minor / major,
            blobs=int(rng.integers(3, 8)),
            spread=float(rng.uniform(0.35, 0.6)) * major,
            envelope=envelope,
        )
    raise ValueError(f"unknown class {label!r}")


def generate_dataset(
    counts: tuple[int, int, int] = DEFAULT_COUNTS, base_seed: int = 0, size: int = 256
) -> tuple[list[GrayImage], list[str]]:
    """Images and labels, class-ordered; item ``i`` uses seed ``base_seed + i``."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != len(CLASSES) or any(c < 0 for c in counts):
        raise ValueError(f"counts must be {len(CLASSES)} nonnegative integers, got {counts}")
    if sum(counts) == 0:
        raise ValueError("at least one galaxy must be requested")
    images, labels = [], []
    index = 0
    for label, n in zip(CLASSES, counts):
        for _ in range(n):
            images.append(generate_galaxy(random_params(label, base_seed + index, size)))
            labels.append(label)
            index += 1
    return images, labels


def write_dataset(images, labels, out_dir) -> Path:
    """Dump images as PGM files plus a ``manifest.csv`` with ``path,label`` rows."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "label"])
        for i, (img, label) in enumerate(zip(images, labels)):
            name = f"{i:04d}_{label}.pgm"
            save_image(img, out_dir / name)
            writer.writerow([name, label])
    return manifest


def with_rotation(params: SynthParams, rotation: float) -> SynthParams:
    return replace(params, rotation=rotation)
