"""Grayscale image container and binary PGM / PNG I/O."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from galmorph.errors import RasterError

_WHITESPACE = b" \t\n\r\v\f"
# ITU-R BT.601 luma weights, scaled to integers so rounding is exact.
_LUMA_WEIGHTS = (299, 587, 114)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale image.

    ``pixels`` is a read-only ``(height, width)`` uint8 array in row-major
    order; 0 is black background and 255 the brightest value.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.uint8, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"GrayImage expects a 2D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"GrayImage needs width, height >= 1, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage(width={self.width}, height={self.height})"

    @classmethod
    def from_float(cls, values: np.ndarray) -> "GrayImage":
        """Round a float array half-up and clip it into [0, 255]."""
        return cls(np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, 255))


def _read_token(data: bytes, pos: int, path) -> tuple[bytes, int]:
    """Return the next header token and the position right after it."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in (b"",):
            break
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise RasterError("malformed header: unexpected end of file", path, start)
    return data[start:pos], pos


def _parse_int(token: bytes, offset: int, what: str, path) -> int:
    if not token.isdigit():
        raise RasterError(f"malformed header: {what} is not a decimal integer ({token!r})", path, offset)
    return int(token)


def _decode_pgm(data: bytes, path) -> GrayImage:
    if len(data) < 2:
        raise RasterError("malformed header: file too short", path, 0)
    magic = data[:2]
    if magic != b"P5":
        raise RasterError(f"unsupported magic {magic!r}", path, 0)
    pos = 2
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE + b"#":
        raise RasterError("malformed header: expected whitespace after magic", path, pos)

    fields = []
    for what in ("width", "height", "maxval"):
        token, end = _read_token(data, pos, path)
        fields.append(_parse_int(token, end - len(token), what, path))
        pos = end
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise RasterError(f"malformed header: non-positive size {width}x{height}", path, pos)
    if maxval != 255:
        raise RasterError(f"unsupported bit depth: maxval {maxval} (only 255 is supported)", path, pos)
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise RasterError("malformed header: expected single whitespace before raster", path, pos)
    pos += 1

    need = width * height
    if len(data) - pos < need:
        raise RasterError(f"truncated raster: expected {need} bytes, found {len(data) - pos}", path, pos)
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    return GrayImage(raster.reshape(height, width))


def _decode_png(path) -> GrayImage:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise RasterError(f"unsupported bit depth: PNG mode {mode}", path, None)
            if mode == "L":
                return GrayImage(np.asarray(im, dtype=np.uint8))
            if mode == "LA":
                return GrayImage(np.asarray(im.getchannel("L"), dtype=np.uint8))
            if mode == "1":
                return GrayImage(np.asarray(im.convert("L"), dtype=np.uint8))
            rgb = np.asarray(im.convert("RGB"), dtype=np.int64)
    except (UnidentifiedImageError, OSError) as exc:
        raise RasterError(f"malformed PNG: {exc}", path, None) from exc
    return GrayImage(luminance(rgb))


def luminance(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an ``(h, w, 3)`` uint8 array, rounded half-up."""
    rgb = np.asarray(rgb, dtype=np.int64)
    wr, wg, wb = _LUMA_WEIGHTS
    weighted = wr * rgb[..., 0] + wg * rgb[..., 1] + wb * rgb[..., 2]
    # floor(x / 1000 + 0.5) computed exactly in integers
    return ((weighted + 500) // 1000).astype(np.uint8)


def load_image(path: str | os.PathLike) -> GrayImage:
    """Read a binary PGM (P5, maxval 255) or an 8-bit PNG.

    Color PNGs are converted to gray with BT.601 weights.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as exc:
        raise RasterError("missing file", path, None) from exc
    except OSError as exc:
        raise RasterError(f"cannot read file: {exc.strerror}", path, None) from exc
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(path)
    return _decode_pgm(data, path)


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes(order="C")


def save_image(img: GrayImage, path: str | os.PathLike) -> None:
    """Write ``img`` as binary PGM with a canonical header."""
    path = Path(path)
    if not path.parent.is_dir():
        raise RasterError("destination directory does not exist", path, None)
    try:
        path.write_bytes(encode_pgm(img))
    except OSError as exc:
        raise RasterError(f"cannot write file: {exc.strerror}", path, None) from exc
