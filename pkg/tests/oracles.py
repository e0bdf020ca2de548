"""Slow, obviously-correct reference implementations used only by the tests."""

import math

import numpy as np


def naive_box_masses(pixels, eps, mode):
    """Per-box masses by explicit loops over every box and pixel."""
    h, w = pixels.shape
    out = []
    for r0 in range(0, h, eps):
        row = []
        for c0 in range(0, w, eps):
            vals = [int(pixels[r, c]) for r in range(r0, min(r0 + eps, h)) for c in range(c0, min(c0 + eps, w))]
            row.append(sum(vals) if mode == "binary" else max(vals) - min(vals))
        out.append(row)
    return np.array(out, dtype=np.int64)


def brute_moments(bits):
    """Centroid and unnormalized scatter by per-pixel Python summation."""
    pts = [(r, c) for r in range(bits.shape[0]) for c in range(bits.shape[1]) if bits[r, c]]
    n = len(pts)
    rb = sum(p[0] for p in pts) / n
    cb = sum(p[1] for p in pts) / n
    rr = sum((p[0] - rb) ** 2 for p in pts)
    cc = sum((p[1] - cb) ** 2 for p in pts)
    rc = sum((p[0] - rb) * (p[1] - cb) for p in pts)
    return rb, cb, np.array([[rr, rc], [rc, cc]])


def brute_otsu(pixels):
    """Exhaustive search over t of the float between-class variance of ``p >= t``."""
    p = np.asarray(pixels, dtype=np.float64).ravel()
    best_t, best_v = None, -1.0
    for t in range(1, 256):
        fg = p[p >= t]
        bg = p[p < t]
        if fg.size == 0 or bg.size == 0:
            continue
        v = bg.size * fg.size * (bg.mean() - fg.mean()) ** 2 / p.size**2
        if v > best_v + 1e-9:
            best_t, best_v = t, v
    return best_t


def angle_oracle(cov):
    """Half-angle formula for the major axis of a 2x2 scatter, measured from the column axis."""
    a, b, c = cov[0][0], cov[0][1], cov[1][1]
    # column-axis variance c, row-axis variance a
    return 0.5 * math.atan2(2 * b, c - a)


def sierpinski(levels):
    """Pascal's triangle mod 2 on a 2**levels square: the IFS attractor at that depth."""
    n = 1 << levels
    idx = np.arange(n)
    return (idx[:, None] & idx[None, :]) == 0


def entropy_bits(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def gain_ratio(parent, left, right):
    n = sum(parent)
    nl, nr = sum(left), sum(right)
    gain = entropy_bits(parent) - (nl * entropy_bits(left) + nr * entropy_bits(right)) / n
    return gain / entropy_bits([nl, nr])
