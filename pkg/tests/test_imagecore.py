from decimal import ROUND_HALF_UP, Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oagrade.errors import CorruptImageError, ImageFormatError, ParameterError, UnsupportedImageError
from oagrade.imagecore import (
    GrayImage,
    RgbImage,
    parse_netpbm,
    read_image,
    rgb_to_gray,
    threshold,
    write_image,
    write_netpbm,
)

gray_arrays = arrays(
    np.uint8,
    st.tuples(st.integers(1, 12), st.integers(1, 12)),
)
rgb_arrays = arrays(
    np.uint8,
    st.tuples(st.integers(1, 8), st.integers(1, 8), st.just(3)),
)


def test_parse_ascii_literal():
    img = parse_netpbm(b"P2 2 1 255 0 255")
    assert isinstance(img, GrayImage)
    assert (img.width, img.height) == (2, 1)
    assert img.pixels.tolist() == [[0, 255]]


def test_parse_with_comments():
    data = b"P2\n# a comment\n3 # inline\n1\n# another\n255\n1 2 3\n"
    assert parse_netpbm(data).pixels.tolist() == [[1, 2, 3]]


def test_parse_binary_comment_before_maxval():
    data = b"P5\n2 2\n# c\n255\n" + bytes([0, 10, 20, 255])
    assert parse_netpbm(data).pixels.tolist() == [[0, 10], [20, 255]]


def test_parse_rgb_variants():
    ascii_ = parse_netpbm(b"P3 1 2 255  1 2 3  4 5 6")
    binary = parse_netpbm(b"P6 1 2 255\n" + bytes([1, 2, 3, 4, 5, 6]))
    assert isinstance(ascii_, RgbImage)
    assert ascii_ == binary
    assert ascii_.pixels[1, 0].tolist() == [4, 5, 6]


def test_binary_payload_may_contain_whitespace_bytes():
    payload = bytes([10, 32, 9, 13])
    assert parse_netpbm(b"P5 4 1 255\n" + payload).pixels.ravel().tolist() == list(payload)


@pytest.mark.parametrize("data", [b"P7 1 1 255 0", b"P1 1 1 1", b"JUNK", b""])
def test_unknown_magic(data):
    with pytest.raises(ImageFormatError):
        parse_netpbm(data)


@pytest.mark.parametrize("data", [b"P2 1 1 65535 0", b"P5 1 1 15\n\x00"])
def test_maxval_not_255(data):
    with pytest.raises(UnsupportedImageError):
        parse_netpbm(data)


@pytest.mark.parametrize(
    "data",
    [
        b"P5 2 2 255\n\x00\x01\x02",
        b"P6 1 1 255\n\x00\x01",
        b"P2 2 2 255 1 2 3",
        b"P2 2 1 255 1 256",
        b"P2 2 1",
    ],
)
def test_truncated_or_bad_payload(data):
    with pytest.raises(CorruptImageError):
        parse_netpbm(data)


def test_bad_dimension_token():
    with pytest.raises(ImageFormatError):
        parse_netpbm(b"P2 x 1 255 0")


@given(gray_arrays, st.booleans())
def test_gray_round_trip(px, binary):
    img = GrayImage(px)
    assert parse_netpbm(write_netpbm(img, binary=binary)) == img


@given(rgb_arrays, st.booleans())
def test_rgb_round_trip(px, binary):
    img = RgbImage(px)
    assert parse_netpbm(write_netpbm(img, binary=binary)) == img


@given(gray_arrays)
def test_p5_serialisation_is_canonical(px):
    data = write_netpbm(GrayImage(px))
    assert write_netpbm(parse_netpbm(data)) == data
    # other header whitespace parses to the same image and re-serialises identically
    h, w = px.shape
    loose = f"P5  # x\n {w}\t{h}\n255 ".encode() + px.tobytes()
    assert write_netpbm(parse_netpbm(loose)) == data


def test_file_round_trip(tmp_path, rng):
    img = GrayImage(rng.integers(0, 256, size=(5, 7), dtype=np.uint8))
    write_image(img, tmp_path / "a.pgm")
    assert read_image(tmp_path / "a.pgm") == img


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_image(tmp_path / "nope.pgm")


@pytest.mark.parametrize(
    "rgb, expected",
    [
        ((255, 0, 0), 76),  # 76.245
        ((0, 255, 0), 150),  # 149.685
        ((0, 0, 255), 29),  # 29.07
        ((255, 255, 255), 255),
        ((0, 0, 0), 0),
        ((1, 1, 0), 1),  # 0.886
        ((0, 0, 5), 1),  # 0.57
    ],
)
def test_rgb_to_gray_hand_values(rgb, expected):
    img = RgbImage(np.array([[rgb]], dtype=np.uint8))
    assert rgb_to_gray(img).pixels[0, 0] == expected


def _luma_decimal(r, g, b):
    v = Decimal("0.299") * r + Decimal("0.587") * g + Decimal("0.114") * b
    return int(v.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def test_rgb_to_gray_matches_decimal_oracle(rng):
    px = rng.integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
    # exact halves: 7.5 and 8.5
    px[0, 0] = (0, 12, 4)
    px[0, 1] = (1, 13, 5)
    gray = rgb_to_gray(RgbImage(px)).pixels
    expected = [[_luma_decimal(*map(int, p)) for p in row] for row in px]
    assert gray.tolist() == expected
    assert gray[0, 0] == 8 and gray[0, 1] == 9


@pytest.mark.parametrize("g", [0, 1, 17, 127, 128, 200, 254, 255])
def test_gray_triplet_is_fixed(g):
    img = RgbImage(np.full((2, 3, 3), g, dtype=np.uint8))
    assert np.all(rgb_to_gray(img).pixels == g)


@given(rgb_arrays)
def test_rgb_to_gray_within_channel_range(px):
    gray = rgb_to_gray(RgbImage(px)).pixels
    assert gray.shape == px.shape[:2]
    assert np.all(gray >= px.min(axis=2))
    assert np.all(gray <= px.max(axis=2))


def test_threshold_literal():
    img = GrayImage(np.array([[30, 40, 50]], dtype=np.uint8))
    assert threshold(img, 40).pixels.tolist() == [[0, 40, 50]]


def test_threshold_zero_is_identity(rng):
    img = GrayImage(rng.integers(0, 256, size=(9, 9), dtype=np.uint8))
    assert threshold(img, 0) == img


def test_threshold_all_zero_fixed_point():
    img = GrayImage(np.zeros((4, 4), dtype=np.uint8))
    assert threshold(img, 40) == img


def test_threshold_range_checked():
    with pytest.raises(ParameterError):
        threshold(GrayImage(np.zeros((1, 1), dtype=np.uint8)), 256)


@settings(max_examples=50)
@given(gray_arrays, st.integers(0, 255))
def test_threshold_properties(px, t):
    img = GrayImage(px)
    once = threshold(img, t)
    assert threshold(once, t) == once
    assert np.all(once.pixels <= img.pixels)
    kept = img.pixels >= t
    assert np.array_equal(once.pixels[kept], img.pixels[kept])
    assert np.all(once.pixels[~kept] == 0)


def test_images_are_immutable():
    img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1


def test_image_validation():
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        GrayImage(np.array([[300]]))
    with pytest.raises(ValueError):
        RgbImage(np.zeros((2, 2), dtype=np.uint8))
