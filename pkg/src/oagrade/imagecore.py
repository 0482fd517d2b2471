"""Netpbm I/O, RGB to grayscale conversion and background thresholding.

Images are immutable wrappers around ``uint8`` numpy arrays: ``(height, width)``
for :class:`GrayImage` and ``(height, width, 3)`` for :class:`RgbImage`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import CorruptImageError, ImageFormatError, ParameterError, UnsupportedImageError

#: frame size of the original radiographs; other sizes are accepted
EXPECTED_SIZE = (200, 150)

_WHITESPACE = b" \t\n\r\v\f"
_MAGICS = (b"P2", b"P3", b"P5", b"P6")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayImage:
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"gray image needs a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("gray values must lie in [0, 255]")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RgbImage:
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"rgb image needs an (h, w, 3) array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("channel values must lie in [0, 255]")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


class _HeaderReader:
    """Tokenizer for the whitespace/comment separated Netpbm header."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def _skip(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos : self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                eol = data.find(b"\n", self.pos)
                self.pos = n if eol < 0 else eol + 1
            else:
                break

    def token(self, what: str) -> bytes:
        self._skip()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        if start == self.pos:
            raise CorruptImageError(f"unexpected end of data while reading {what}")
        return self.data[start : self.pos]

    def integer(self, what: str) -> int:
        tok = self.token(what)
        if not tok.isdigit():
            raise ImageFormatError(f"invalid {what}: {tok!r}")
        return int(tok)


def parse_netpbm(data: bytes) -> GrayImage | RgbImage:
    """Decode a P2/P3/P5/P6 file with maxval 255.

    P2/P5 give a :class:`GrayImage`, P3/P6 an :class:`RgbImage`.
    """
    magic = bytes(data[:2])
    if magic not in _MAGICS:
        raise ImageFormatError(f"unknown Netpbm magic {magic!r}")
    if len(data) > 2 and data[2:3] not in _WHITESPACE + b"#":
        raise ImageFormatError(f"unknown Netpbm magic {bytes(data[:3])!r}")
    reader = _HeaderReader(data, 2)
    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedImageError(f"maxval {maxval} is not supported (only 255)")

    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels
    if magic in (b"P5", b"P6"):
        # exactly one whitespace byte separates maxval from the raster
        if reader.pos >= len(data) or data[reader.pos : reader.pos + 1] not in _WHITESPACE:
            raise CorruptImageError("missing raster after header")
        start = reader.pos + 1
        raster = data[start : start + count]
        if len(raster) < count:
            raise CorruptImageError(f"truncated raster: expected {count} bytes, got {len(raster)}")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        tokens = data[reader.pos :].split()
        if len(tokens) < count:
            raise CorruptImageError(f"truncated raster: expected {count} samples, got {len(tokens)}")
        try:
            values = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError as exc:
            raise CorruptImageError(f"non-numeric sample in raster: {exc}") from None
        if values.min() < 0 or values.max() > 255:
            raise CorruptImageError("sample value outside [0, 255]")

    if channels == 1:
        return GrayImage(values.reshape(height, width).astype(np.uint8))
    return RgbImage(values.reshape(height, width, 3).astype(np.uint8))


def write_netpbm(img: GrayImage | RgbImage, binary: bool = True) -> bytes:
    """Encode as P5/P6 (``binary=True``) or P2/P3, with a minimal header."""
    gray = isinstance(img, GrayImage)
    if binary:
        magic = "P5" if gray else "P6"
        header = f"{magic}\n{img.width} {img.height}\n255\n".encode("ascii")
        return header + img.pixels.tobytes()
    magic = "P2" if gray else "P3"
    rows = img.pixels.reshape(img.height, -1)
    body = "\n".join(" ".join(str(v) for v in row) for row in rows)
    return f"{magic}\n{img.width} {img.height}\n255\n{body}\n".encode("ascii")


def read_image(path: str | os.PathLike) -> GrayImage | RgbImage:
    with open(path, "rb") as fh:
        return parse_netpbm(fh.read())


def write_image(img: GrayImage | RgbImage, path: str | os.PathLike, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(write_netpbm(img, binary=binary))


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """BT.601 luma, rounded half away from zero.

    Computed in integer arithmetic as ``(299 r + 587 g + 114 b + 500) // 1000``
    so that exact halves round up deterministically.
    """
    px = img.pixels.astype(np.int64)
    weighted = 299 * px[..., 0] + 587 * px[..., 1] + 114 * px[..., 2]
    gray = np.clip((weighted + 500) // 1000, 0, 255)
    return GrayImage(gray.astype(np.uint8))


def to_gray(img: GrayImage | RgbImage) -> GrayImage:
    return img if isinstance(img, GrayImage) else rgb_to_gray(img)


def threshold(img: GrayImage, t: int = 40) -> GrayImage:
    """Zero every pixel below ``t``; pixels at or above ``t`` are kept as is."""
    if not 0 <= t <= 255:
        raise ParameterError(f"threshold must be in [0, 255], got {t}")
    px = img.pixels
    return GrayImage(np.where(px < t, np.uint8(0), px))
