import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from galmorph import synth
from galmorph.errors import DegenerateInputError, OrientationError
from galmorph.fractal import fd_feature
from galmorph.raster import GrayImage
from galmorph.standardize import (
    BinaryMask,
    binarize,
    galaxy_moments,
    otsu_threshold,
    principal_angle,
    resize_bilinear,
    rotate_about,
    standardize,
)
from oracles import angle_oracle, brute_moments, brute_otsu


def test_two_level_image():
    px = np.zeros((6, 8), np.uint8)
    px[:, 4:] = 200
    mask = binarize(GrayImage(px))
    assert np.array_equal(mask.bits, px == 200)


def test_constant_image_is_degenerate():
    with pytest.raises(DegenerateInputError):
        binarize(GrayImage(np.full((5, 5), 7, np.uint8)))


def test_checkerboard_matches_exhaustive_search():
    r, c = np.indices((8, 8))
    px = np.where((r + c) % 2 == 0, 240, 10).astype(np.uint8)
    t = otsu_threshold(px)
    assert t == brute_otsu(px) == 11  # lowest maximizer
    assert np.array_equal(binarize(GrayImage(px)).bits, px == 240)


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, (6, 7)))
def test_otsu_matches_oracle(px):
    if px.min() == px.max():
        return
    assert otsu_threshold(px) == brute_otsu(px)


def test_single_pixel_moments():
    bits = np.zeros((8, 8), bool)
    bits[3, 5] = True
    m = galaxy_moments(bits)
    assert (m.centroid_row, m.centroid_col) == (3.0, 5.0)
    assert np.array_equal(m.cov, np.zeros((2, 2)))


def test_two_pixel_moments():
    bits = np.zeros((3, 3), bool)
    bits[0, 0] = bits[0, 2] = True
    m = galaxy_moments(bits)
    assert (m.centroid_row, m.centroid_col) == (0.0, 1.0)
    assert np.array_equal(m.cov, [[0.0, 0.0], [0.0, 2.0]])


def test_rectangle_has_no_cross_moment():
    bits = np.zeros((9, 9), bool)
    bits[2:7, 1:6] = True
    m = galaxy_moments(BinaryMask(bits, 1))
    assert m.cov[0, 1] == m.cov[1, 0] == 0.0
    rb, cb, cov = brute_moments(bits)
    assert (m.centroid_row, m.centroid_col) == (rb, cb)
    assert np.array_equal(m.cov, cov)


@settings(max_examples=50, deadline=None)
@given(arrays(bool, (7, 9)))
def test_moments_match_brute_force(bits):
    if not bits.any():
        with pytest.raises(DegenerateInputError):
            galaxy_moments(bits)
        return
    m = galaxy_moments(bits)
    rb, cb, cov = brute_moments(bits)
    assert m.centroid_row == pytest.approx(rb, abs=1e-12)
    assert m.centroid_col == pytest.approx(cb, abs=1e-12)
    assert np.allclose(m.cov, cov, atol=1e-9)
    assert np.array_equal(m.cov, m.cov.T)
    assert np.linalg.eigvalsh(m.cov).min() >= -1e-9


@pytest.mark.parametrize(
    "cov, expected",
    [
        ([[0, 0], [0, 4]], 0.0),
        ([[4, 0], [0, 0]], math.pi / 2),
        ([[2, 1], [1, 2]], math.pi / 4),
    ],
)
def test_principal_angle_examples(cov, expected):
    assert principal_angle(np.array(cov, float)) == pytest.approx(expected, abs=1e-12)


def test_zero_covariance_raises():
    with pytest.raises(OrientationError):
        principal_angle(np.zeros((2, 2)))


def test_isotropic_returns_zero():
    assert principal_angle(np.array([[3.0, 0.0], [0.0, 3.0]])) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0, 100, allow_nan=False),
    st.floats(0, 100, allow_nan=False),
    st.floats(-1, 1, allow_nan=False),
)
def test_angle_matches_half_angle_formula(a, c, rho):
    b = rho * math.sqrt(a * c)
    cov = np.array([[a, b], [b, c]])
    lam = np.linalg.eigvalsh(cov)
    if lam[1] - lam[0] <= 1e-6 * max(1.0, lam[1]):
        return
    theta = principal_angle(cov)
    assert -math.pi / 2 < theta <= math.pi / 2
    ref = angle_oracle(cov)
    diff = (theta - ref + math.pi / 2) % math.pi - math.pi / 2
    assert abs(diff) < 1e-7


def test_rotation_moves_axis_to_horizontal():
    # a diagonal line of pixels at +45 degrees (towards increasing row)
    values = np.zeros((21, 21))
    for i in range(3, 18):
        values[i, i] = 255.0
    out = rotate_about(values, math.pi / 4, (10.0, 10.0))
    m = galaxy_moments(out > 100)
    assert abs(principal_angle(m)) < 1e-6


def test_resize_identity_and_constant():
    v = np.arange(12, dtype=float).reshape(3, 4)
    assert np.array_equal(resize_bilinear(v, (3, 4)), v)
    assert np.allclose(resize_bilinear(np.full((5, 9), 4.0), (128, 128)), 4.0)


def test_horizontal_ellipse_is_a_fixed_point():
    p = synth.SynthParams(synth.ELLIPTICAL, size=128, scale=10.0, axis_ratio=0.5, noise=0.0)
    out = standardize(synth.generate_galaxy(p))
    assert out.shape == (128, 128)
    assert abs(principal_angle(galaxy_moments(binarize(out)))) < 0.02


def test_render_time_rotation_gives_similar_output():
    base = synth.SynthParams(synth.ELLIPTICAL, size=128, scale=10.0, axis_ratio=0.5, noise=0.0)
    a = standardize(synth.generate_galaxy(base)).pixels.astype(float)
    b = standardize(synth.generate_galaxy(synth.with_rotation(base, math.pi / 4))).pixels.astype(float)
    assert np.abs(a - b).mean() <= 6.0


@settings(max_examples=25, deadline=None)
@given(st.integers(20, 90), st.integers(20, 90), st.integers(0, 2**31 - 1))
def test_output_always_128(h, w, seed):
    rng = np.random.default_rng(seed)
    px = np.zeros((h, w), np.uint8)
    px[h // 4 : 3 * h // 4, w // 3 : 2 * w // 3 + 1] = rng.integers(100, 256, size=1)[0]
    px ^= rng.integers(0, 40, size=(h, w), dtype=np.uint8)
    out = standardize(GrayImage(px))
    assert out.shape == (128, 128)


def test_synth_set_restandardizes_flat(standardized_set):
    images, _ = standardized_set
    worst = max(abs(principal_angle(galaxy_moments(binarize(img)))) for img in images)
    assert worst < 0.02


@pytest.mark.parametrize("degrees", [15, 45, 90])
def test_fd_rotation_stability(degrees):
    for seed in range(6):
        p = synth.random_params(synth.ELLIPTICAL, seed)
        d_ref = fd_feature(standardize(synth.generate_galaxy(p)))
        rotated = synth.with_rotation(p, p.rotation + math.radians(degrees))
        d_rot = fd_feature(standardize(synth.generate_galaxy(rotated)))
        assert abs(d_ref - d_rot) <= 0.03
