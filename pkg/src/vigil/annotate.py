"""Tiny drawing helpers for overlay rendering.

Everything draws into a writable numpy RGB array and stays strictly inside
the region it was given, so callers can reason about which pixels an overlay
may touch. Text uses PIL's embedded bitmap font; legibility, not typography,
is the contract here.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from PIL import Image, ImageDraw, ImageFont

_PADDING = 2


@lru_cache(maxsize=1)
def _font() -> ImageFont.ImageFont:
    return ImageFont.load_default()


def measure_label_box(text: str) -> tuple[int, int]:
    """Width and height of the box ``draw_label_box`` would draw for ``text``."""
    left, top, right, bottom = _font().getbbox(text)
    return right - left + 2 * _PADDING, bottom - top + 2 * _PADDING


def draw_label_box(
    pixels: np.ndarray,
    x: int,
    y: int,
    text: str,
    region: tuple[int, int, int, int] | None = None,
    fg: tuple[int, int, int] = (255, 255, 255),
    bg: tuple[int, int, int] = (20, 20, 20),
) -> tuple[int, int, int, int]:
    """Draw text on a filled box at (x, y), clipped to ``region``.

    Returns the clipped rectangle actually drawn (x0, y0, x1, y1).
    """
    height, width = pixels.shape[:2]
    if region is None:
        region = (0, 0, width, height)
    box_w, box_h = measure_label_box(text)
    x0 = max(x, region[0])
    y0 = max(y, region[1])
    x1 = min(x + box_w, region[2])
    y1 = min(y + box_h, region[3])
    if x1 <= x0 or y1 <= y0:
        return (x0, y0, x0, y0)
    patch = Image.fromarray(pixels[y0:y1, x0:x1])
    draw = ImageDraw.Draw(patch)
    draw.rectangle((0, 0, patch.width, patch.height), fill=bg)
    draw.text((x - x0 + _PADDING, y - y0 + _PADDING), text, fill=fg, font=_font())
    pixels[y0:y1, x0:x1] = np.asarray(patch)
    return (x0, y0, x1, y1)


def draw_border(
    pixels: np.ndarray,
    rect: tuple[int, int, int, int],
    color: tuple[int, int, int],
    thickness: int = 3,
) -> None:
    """Draw a border just inside the half-open rectangle."""
    x0, y0, x1, y1 = rect
    t = min(thickness, (x1 - x0 + 1) // 2, (y1 - y0 + 1) // 2)
    rgb = np.array(color, dtype=np.uint8)
    pixels[y0 : y0 + t, x0:x1] = rgb
    pixels[y1 - t : y1, x0:x1] = rgb
    pixels[y0:y1, x0 : x0 + t] = rgb
    pixels[y0:y1, x1 - t : x1] = rgb


def tint_rect(
    pixels: np.ndarray,
    rect: tuple[int, int, int, int],
    color: tuple[int, int, int],
    alpha: float = 0.2,
) -> None:
    """Blend ``color`` over the rectangle at the given opacity."""
    x0, y0, x1, y1 = rect
    region = pixels[y0:y1, x0:x1].astype(np.float64)
    blended = region * (1.0 - alpha) + np.array(color, dtype=np.float64) * alpha
    pixels[y0:y1, x0:x1] = np.clip(np.floor(blended + 0.5), 0, 255).astype(np.uint8)
