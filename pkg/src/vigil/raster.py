"""Image data model and the deterministic pixel operations everything else consumes.

A Raster is an immutable 8-bit RGB image; a GrayRaster is its single-channel
counterpart. All operations here are pure: same input, bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Below this edge length the pipeline refuses to classify at all.
HARD_MIN_SIDE = 32
# Below this edge length classification proceeds but a warning is emitted.
SOFT_MIN_SIDE = 150

MODEL_INPUT_SIDE = 299

# ITU-R BT.601 luma weights.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


def _round_half_up(values: np.ndarray) -> np.ndarray:
    """Round half away from zero for nonnegative arrays (np.round is half-even)."""
    return np.floor(values + 0.5)


@dataclass(frozen=True)
class Raster:
    """Row-major 8-bit RGB image. ``pixels`` has shape (height, width, 3)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"raster dimensions must be positive, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise InputError(
                f"pixel buffer shape {self.pixels.shape} does not match {self.height}x{self.width}x3"
            )
        if self.pixels.dtype != np.uint8:
            raise InputError(f"pixel buffer must be uint8, got {self.pixels.dtype}")
        self.pixels.setflags(write=False)

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "Raster":
        # copy so freezing the raster never locks the caller's buffer
        arr = np.array(pixels, dtype=np.uint8, copy=True, order="C")
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InputError(f"expected an HxWx3 array, got shape {pixels.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], pixels=arr)

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "Raster":
        """Build from raw row-major RGB24 bytes (the raw-stream wire format)."""
        expected = width * height * 3
        if len(data) != expected:
            raise InputError(f"raw frame is {len(data)} bytes, expected {expected} for {width}x{height}")
        arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()
        return cls(width=width, height=height, pixels=arr)

    @classmethod
    def filled(cls, width: int, height: int, rgb: tuple[int, int, int]) -> "Raster":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:] = rgb
        return cls(width=width, height=height, pixels=arr)

    def crop(self, x0: int, y0: int, x1: int, y1: int) -> "Raster":
        """Crop the half-open rectangle [x0, x1) x [y0, y1)."""
        if not (0 <= x0 < x1 <= self.width and 0 <= y0 < y1 <= self.height):
            raise InputError(f"crop rectangle ({x0},{y0},{x1},{y1}) outside {self.width}x{self.height}")
        return Raster.from_array(self.pixels[y0:y1, x0:x1])

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()


@dataclass(frozen=True)
class GrayRaster:
    """Row-major 8-bit luma image. ``pixels`` has shape (height, width)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"raster dimensions must be positive, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width):
            raise InputError(
                f"pixel buffer shape {self.pixels.shape} does not match {self.height}x{self.width}"
            )
        if self.pixels.dtype != np.uint8:
            raise InputError(f"pixel buffer must be uint8, got {self.pixels.dtype}")
        self.pixels.setflags(write=False)

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "GrayRaster":
        arr = np.array(pixels, dtype=np.uint8, copy=True, order="C")
        if arr.ndim != 2:
            raise InputError(f"expected an HxW array, got shape {pixels.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], pixels=arr)


def to_gray(img: Raster) -> GrayRaster:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), rounded half up.

    Terms are added left to right so results are bit-identical to scalar
    evaluation (a dot product may round .5 boundaries differently).
    """
    channels = img.pixels.astype(np.float64)
    luma = channels[..., 0] * _LUMA_WEIGHTS[0]
    luma += channels[..., 1] * _LUMA_WEIGHTS[1]
    luma += channels[..., 2] * _LUMA_WEIGHTS[2]
    out = np.clip(_round_half_up(luma), 0, 255).astype(np.uint8)
    return GrayRaster(width=img.width, height=img.height, pixels=out)


def flip_horizontal(img: Raster) -> Raster:
    """Mirror columns: column j maps to column width-1-j."""
    return Raster.from_array(img.pixels[:, ::-1, :])


def flip_horizontal_gray(img: GrayRaster) -> GrayRaster:
    return GrayRaster.from_array(img.pixels[:, ::-1])


def _bilinear_axis_indices(out_size: int, in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source indices and weights for one axis, pixel-center convention with edge clamp."""
    scale = in_size / out_size
    src = (np.arange(out_size, dtype=np.float64) + 0.5) * scale - 0.5
    lo = np.floor(src)
    frac = src - lo
    lo_idx = np.clip(lo, 0, in_size - 1).astype(np.intp)
    hi_idx = np.clip(lo + 1, 0, in_size - 1).astype(np.intp)
    return lo_idx, hi_idx, frac


def resize_bilinear(img: Raster, out_w: int, out_h: int) -> Raster:
    """Bilinear resize with edge clamping; identity when out dims equal input dims."""
    if out_w < 1 or out_h < 1:
        raise InputError(f"output dimensions must be >= 1, got {out_w}x{out_h}")
    x_lo, x_hi, x_frac = _bilinear_axis_indices(out_w, img.width)
    y_lo, y_hi, y_frac = _bilinear_axis_indices(out_h, img.height)
    src = img.pixels.astype(np.float64)

    rows = src[:, x_lo] * (1.0 - x_frac)[None, :, None] + src[:, x_hi] * x_frac[None, :, None]
    blended = rows[y_lo] * (1.0 - y_frac)[:, None, None] + rows[y_hi] * y_frac[:, None, None]

    out = np.clip(_round_half_up(blended), 0, 255).astype(np.uint8)
    return Raster(width=out_w, height=out_h, pixels=out)


def normalize_for_model(img: Raster) -> np.ndarray:
    """Map channels from [0, 255] to [-1, 1] via v/127.5 - 1 for the 299x299 model input."""
    if img.width != MODEL_INPUT_SIDE or img.height != MODEL_INPUT_SIDE:
        raise InputError(
            f"model input must be {MODEL_INPUT_SIDE}x{MODEL_INPUT_SIDE}, got {img.width}x{img.height}"
        )
    return img.pixels.astype(np.float32) / np.float32(127.5) - np.float32(1.0)
