"""Brightness enhancement for images that fail the dark gate.

The built-in enhancer is a global gamma curve, a deterministic stand-in for a
learned low-light enhancer. An external enhancer can be plugged in as a
subprocess that reads a PNG on stdin and writes a PNG to stdout; on failure it
falls back to the built-in curve with a warning.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import InputError
from .luminance import DEFAULT_PIXEL_THRESHOLD, DEFAULT_RATIO_THRESHOLD, dark_report
from .raster import Raster, _round_half_up, to_gray

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 0.6

EnhanceMode = Literal["auto", "always", "never"]


@dataclass(frozen=True)
class EnhancePolicy:
    mode: EnhanceMode = "auto"
    gamma: float = DEFAULT_GAMMA
    pixel_threshold: int = DEFAULT_PIXEL_THRESHOLD
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD

    def __post_init__(self) -> None:
        if self.mode not in ("auto", "always", "never"):
            raise InputError(f"unknown enhance mode {self.mode!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise InputError(f"gamma must be in (0, 1], got {self.gamma}")


def gamma_lut(gamma: float) -> np.ndarray:
    """256-entry lookup table v -> round(255 * (v/255)^gamma), rounded half up."""
    if not 0.0 < gamma <= 1.0:
        raise InputError(f"gamma must be in (0, 1], got {gamma}")
    levels = np.arange(256, dtype=np.float64) / 255.0
    return np.clip(_round_half_up(255.0 * np.power(levels, gamma)), 0, 255).astype(np.uint8)


def enhance_gamma(img: Raster, gamma: float) -> Raster:
    """Apply the gamma curve per channel; gamma 1.0 is the identity."""
    lut = gamma_lut(gamma)
    return Raster(width=img.width, height=img.height, pixels=lut[img.pixels])


class ExternalEnhancer:
    """Subprocess enhancer: PNG in on stdin, PNG out on stdout.

    A nonzero exit, undecodable output, or changed dimensions counts as
    failure; the caller falls back to the built-in gamma curve.
    """

    def __init__(self, command: str, timeout: float = 60.0):
        self.argv = shlex.split(command)
        if not self.argv:
            raise InputError("external enhancer command is empty")
        self.timeout = timeout

    def __call__(self, img: Raster) -> Raster:
        from .imageio import decode_image_bytes, encode_png

        proc = subprocess.run(
            self.argv,
            input=encode_png(img),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=self.timeout,
        )
        if proc.returncode != 0:
            raise RuntimeError(
                f"external enhancer exited {proc.returncode}: {proc.stderr.decode(errors='replace').strip()}"
            )
        out = decode_image_bytes(proc.stdout)
        if (out.width, out.height) != (img.width, img.height):
            raise RuntimeError(
                f"external enhancer changed dimensions {img.width}x{img.height} -> {out.width}x{out.height}"
            )
        return out


def maybe_enhance(
    img: Raster,
    policy: EnhancePolicy,
    enhancer: Callable[[Raster], Raster] | None = None,
) -> tuple[Raster, bool]:
    """Apply the policy's enhancement decision; returns (image, applied).

    mode=never passes the image through untouched; mode=always enhances
    unconditionally; mode=auto enhances iff the dark gate trips.
    """
    if policy.mode == "never":
        return img, False
    if policy.mode == "auto":
        report = dark_report(to_gray(img), policy.pixel_threshold, policy.ratio_threshold)
        if not report.is_dark:
            return img, False
    if enhancer is not None:
        try:
            return enhancer(img), True
        except Exception as exc:
            logger.warning("external enhancer failed (%s); falling back to gamma %.3f", exc, policy.gamma)
    return enhance_gamma(img, policy.gamma), True
