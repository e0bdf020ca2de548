import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from galmorph.errors import RasterError
from galmorph.raster import GrayImage, encode_pgm, load_image, luminance, save_image


def test_minimal_p5(tmp_path):
    f = tmp_path / "one.pgm"
    f.write_bytes(b"P5 1 1 255\n\x00")
    img = load_image(f)
    assert img.shape == (1, 1)
    assert img.pixels[0, 0] == 0


def test_encoding_is_exact():
    img = GrayImage(np.array([[0, 255]], dtype=np.uint8))
    assert encode_pgm(img) == b"P5\n2 1\n255\n\x00\xff"


def test_save_load_byte_identical(tmp_path):
    rng = np.random.default_rng(3)
    src = tmp_path / "src.pgm"
    px = rng.integers(0, 256, size=(7, 11), dtype=np.uint8)
    src.write_bytes(b"P5\n11 7\n255\n" + px.tobytes())
    out = tmp_path / "out.pgm"
    save_image(load_image(src), out)
    assert out.read_bytes() == src.read_bytes()


def test_header_comments_are_skipped(tmp_path):
    f = tmp_path / "c.pgm"
    f.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x07\x09")
    assert load_image(f).pixels.tolist() == [[7, 9]]


@pytest.mark.parametrize(
    "data, needle",
    [
        (b"P3\n1 1\n255\n0\n", "unsupported magic"),
        (b"P5\n1 1\n65535\n\x00\x00", "unsupported bit depth"),
        (b"P5\n2 2\n255\n\x00", "truncated"),
        (b"P5\n2 x\n255\n", "byte offset"),
    ],
)
def test_malformed_files(tmp_path, data, needle):
    f = tmp_path / "bad.pgm"
    f.write_bytes(data)
    with pytest.raises(RasterError) as info:
        load_image(f)
    assert needle in str(info.value)
    assert str(f) in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(RasterError):
        load_image(tmp_path / "nope.pgm")


def test_save_to_missing_directory(tmp_path):
    with pytest.raises(RasterError):
        save_image(GrayImage(np.zeros((2, 2), np.uint8)), tmp_path / "missing" / "x.pgm")


def test_gray_png_is_bit_exact(tmp_path):
    px = np.arange(256, dtype=np.uint8).reshape(16, 16)
    f = tmp_path / "g.png"
    Image.fromarray(px, mode="L").save(f)
    assert np.array_equal(load_image(f).pixels, px)


def test_color_png_uses_rounded_luma(tmp_path):
    rgb = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]]], dtype=np.uint8)
    f = tmp_path / "c.png"
    Image.fromarray(rgb, mode="RGB").save(f)
    got = load_image(f).pixels[0].tolist()
    # 0.299 R + 0.587 G + 0.114 B, half-up
    expected = [int(np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)) for r, g, b in rgb[0].tolist()]
    assert got == expected == [76, 150, 29, 18]
    assert luminance(rgb).tolist() == [expected]


def test_invalid_images_rejected():
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3), np.uint8))
    with pytest.raises(ValueError):
        GrayImage(np.zeros(5, np.uint8))


def test_pixels_are_read_only():
    img = GrayImage(np.zeros((2, 2), np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 12),
    st.integers(1, 12),
    st.data(),
)
def test_round_trip_property(tmp_path_factory, h, w, data):
    px = np.array(data.draw(st.lists(st.integers(0, 255), min_size=h * w, max_size=h * w)), dtype=np.uint8)
    img = GrayImage(px.reshape(h, w))
    f = tmp_path_factory.mktemp("rt") / "x.pgm"
    save_image(img, f)
    back = load_image(f)
    assert back == img
    assert (back.width, back.height) == (w, h)
