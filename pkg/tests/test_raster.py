import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vigil.errors import InputError
from vigil.raster import (
    GrayRaster,
    Raster,
    flip_horizontal,
    flip_horizontal_gray,
    normalize_for_model,
    resize_bilinear,
    to_gray,
)

from conftest import make_raster


def gray_oracle(r: int, g: int, b: int) -> int:
    """Independent scalar luma: BT.601 weights, rounded half up."""
    import math

    return min(255, int(math.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)))


small_rasters = st.integers(1, 8).flatmap(
    lambda w: st.integers(1, 8).flatmap(
        lambda h: st.lists(
            st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)),
            min_size=w * h,
            max_size=w * h,
        ).map(lambda px: Raster.from_array(np.array(px, dtype=np.uint8).reshape(h, w, 3)))
    )
)


class TestRasterModel:
    def test_rejects_zero_dimensions(self):
        with pytest.raises(InputError):
            Raster(width=0, height=1, pixels=np.zeros((1, 0, 3), dtype=np.uint8))

    def test_rejects_wrong_buffer_length(self):
        with pytest.raises(InputError):
            Raster(width=2, height=2, pixels=np.zeros((2, 1, 3), dtype=np.uint8))

    def test_from_bytes_roundtrip(self):
        data = bytes(range(2 * 3 * 3))
        r = Raster.from_bytes(3, 2, data)
        assert r.to_bytes() == data

    def test_from_bytes_rejects_short_buffer(self):
        with pytest.raises(InputError):
            Raster.from_bytes(3, 2, b"\x00" * 17)

    def test_pixels_are_immutable(self):
        r = Raster.filled(2, 2, (1, 2, 3))
        with pytest.raises(ValueError):
            r.pixels[0, 0, 0] = 9


class TestToGray:
    def test_black_maps_to_zero(self):
        assert to_gray(Raster.filled(1, 1, (0, 0, 0))).pixels[0, 0] == 0

    def test_white_maps_to_255(self):
        assert to_gray(Raster.filled(1, 1, (255, 255, 255))).pixels[0, 0] == 255

    def test_pure_red(self):
        assert gray_oracle(255, 0, 0) == 76
        assert to_gray(Raster.filled(1, 1, (255, 0, 0))).pixels[0, 0] == 76

    @given(small_rasters)
    @settings(max_examples=50, deadline=None)
    def test_matches_scalar_oracle(self, img):
        gray = to_gray(img)
        for y in range(img.height):
            for x in range(img.width):
                r, g, b = (int(v) for v in img.pixels[y, x])
                assert gray.pixels[y, x] == gray_oracle(r, g, b)

    @given(small_rasters)
    @settings(max_examples=30, deadline=None)
    def test_commutes_with_flip(self, img):
        left = to_gray(flip_horizontal(img))
        right = flip_horizontal_gray(to_gray(img))
        assert np.array_equal(left.pixels, right.pixels)


class TestFlipHorizontal:
    @given(small_rasters)
    @settings(max_examples=30, deadline=None)
    def test_involution(self, img):
        assert np.array_equal(flip_horizontal(flip_horizontal(img)).pixels, img.pixels)

    def test_two_pixel_swap(self):
        img = Raster.from_array(np.array([[[1, 1, 1], [2, 2, 2]]], dtype=np.uint8))
        flipped = flip_horizontal(img)
        assert flipped.pixels[0, 0, 0] == 2 and flipped.pixels[0, 1, 0] == 1

    def test_symmetric_image_is_fixed_point(self):
        img = Raster.from_array(np.array([[[5] * 3, [9] * 3, [5] * 3]], dtype=np.uint8))
        assert np.array_equal(flip_horizontal(img).pixels, img.pixels)


class TestResizeBilinear:
    def test_dimension_contract(self, rng):
        out = resize_bilinear(make_raster(rng, 600, 400), 299, 299)
        assert (out.width, out.height) == (299, 299)

    def test_constant_stays_constant(self):
        out = resize_bilinear(Raster.filled(50, 50, (12, 200, 73)), 299, 299)
        assert np.all(out.pixels.reshape(-1, 3) == (12, 200, 73))

    def test_upscale_2x1_to_4x1_values(self):
        # hand evaluation of pixel-center bilinear weights with edge clamp:
        # source positions -0.25, 0.25, 0.75, 1.25 -> 0, 63.75, 191.25, 255
        img = Raster.from_array(np.array([[[0, 0, 0], [255, 255, 255]]], dtype=np.uint8))
        out = resize_bilinear(img, 4, 1)
        luma = [int(v) for v in to_gray(out).pixels[0]]
        assert luma == [0, 64, 191, 255]
        assert luma == sorted(luma)

    @given(small_rasters)
    @settings(max_examples=30, deadline=None)
    def test_identity_at_same_size(self, img):
        out = resize_bilinear(img, img.width, img.height)
        assert np.array_equal(out.pixels, img.pixels)

    def test_rejects_zero_output(self, rng):
        with pytest.raises(InputError):
            resize_bilinear(make_raster(rng, 4, 4), 0, 4)
        with pytest.raises(InputError):
            resize_bilinear(make_raster(rng, 4, 4), 4, 0)

    def test_determinism(self, rng):
        img = make_raster(rng, 37, 23)
        a = resize_bilinear(img, 299, 299)
        b = resize_bilinear(img, 299, 299)
        assert np.array_equal(a.pixels, b.pixels)


class TestNormalizeForModel:
    def test_endpoints_and_midpoint(self):
        img = Raster.filled(299, 299, (0, 128, 255))
        tensor = normalize_for_model(img)
        assert tensor.shape == (299, 299, 3)
        assert tensor[0, 0, 0] == -1.0
        assert tensor[0, 0, 2] == 1.0
        assert tensor[0, 0, 1] == pytest.approx(128 / 127.5 - 1, abs=1e-7)

    def test_rejects_wrong_size(self, rng):
        with pytest.raises(InputError):
            normalize_for_model(make_raster(rng, 298, 299))

    def test_monotone_affine(self):
        arr = np.arange(256, dtype=np.uint8)
        img = Raster.from_array(np.stack([arr, arr, arr], axis=1).reshape(1, 256, 3))
        # build a 299x299 canvas around it to satisfy the size contract
        canvas = np.zeros((299, 299, 3), dtype=np.uint8)
        canvas[0, :256] = img.pixels[0]
        tensor = normalize_for_model(Raster.from_array(canvas))
        row = tensor[0, :256, 0]
        assert np.all(np.diff(row) > 0)
        assert np.allclose(np.diff(row), np.diff(row)[0])


class TestGrayRaster:
    def test_buffer_contract(self):
        with pytest.raises(InputError):
            GrayRaster(width=2, height=2, pixels=np.zeros((2, 3), dtype=np.uint8))
