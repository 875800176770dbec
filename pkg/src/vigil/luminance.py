"""Dark-image detection and per-class dataset darkness statistics.

An image is "dark" when the fraction of pixels with luma strictly below a
threshold (default 50) strictly exceeds a ratio threshold (default 0.3).
Both comparisons are deliberately strict; the boundary cases are pinned by
tests.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .errors import InputError
from .raster import GrayRaster, to_gray

logger = logging.getLogger(__name__)

DEFAULT_PIXEL_THRESHOLD = 50
DEFAULT_RATIO_THRESHOLD = 0.3

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class DarkReport:
    dark_pixel_count: int
    total_pixels: int
    ratio: float
    is_dark: bool


@dataclass(frozen=True)
class ClassDarkStats:
    class_name: str
    image_count: int
    dark_count: int
    #: percent rounded half-up to 1 decimal; None when the class has no images
    dark_percentage: float | None


@dataclass(frozen=True)
class SkippedFile:
    path: str
    reason: str


@dataclass(frozen=True)
class DatasetDarkStats:
    classes: list[ClassDarkStats]
    skipped: list[SkippedFile] = field(default_factory=list)


def dark_report(
    img: GrayRaster,
    pixel_threshold: int = DEFAULT_PIXEL_THRESHOLD,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> DarkReport:
    """Count pixels with luma strictly below ``pixel_threshold``.

    The image is dark iff dark_ratio is strictly greater than ``ratio_threshold``.
    """
    if not 0 <= pixel_threshold <= 255:
        raise InputError(f"pixel_threshold must be in [0, 255], got {pixel_threshold}")
    if not 0.0 <= ratio_threshold <= 1.0:
        raise InputError(f"ratio_threshold must be in [0, 1], got {ratio_threshold}")
    total = img.width * img.height
    dark = int(np.count_nonzero(img.pixels < pixel_threshold))
    ratio = dark / total
    return DarkReport(
        dark_pixel_count=dark,
        total_pixels=total,
        ratio=ratio,
        is_dark=ratio > ratio_threshold,
    )


def dark_percentage(dark_count: int, image_count: int) -> float | None:
    """Percent of dark images, rounded half-up to 1 decimal (table presentation)."""
    if image_count == 0:
        return None
    exact = Decimal(100 * dark_count) / Decimal(image_count)
    return float(exact.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def dark_stats(
    dataset_root: str | Path,
    pixel_threshold: int = DEFAULT_PIXEL_THRESHOLD,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> DatasetDarkStats:
    """Apply the dark gate to every image under ``<root>/<class_name>/*.{png,jpg}``.

    Undecodable files are recorded in the skip list, never fatal. Classes are
    reported in lexicographic order.
    """
    root = Path(dataset_root)
    if not root.is_dir():
        raise InputError(f"dataset root {root} is not a directory")

    classes: list[ClassDarkStats] = []
    skipped: list[SkippedFile] = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        image_count = 0
        dark_count = 0
        for path in sorted(class_dir.iterdir()):
            if not path.is_file() or path.suffix.lower() not in _IMAGE_SUFFIXES:
                continue
            try:
                from .imageio import decode_image_file

                raster = decode_image_file(path)
            except Exception as exc:
                logger.warning("skipping %s: %s", path, exc)
                skipped.append(SkippedFile(path=str(path), reason=str(exc)))
                continue
            image_count += 1
            if dark_report(to_gray(raster), pixel_threshold, ratio_threshold).is_dark:
                dark_count += 1
        classes.append(
            ClassDarkStats(
                class_name=class_dir.name,
                image_count=image_count,
                dark_count=dark_count,
                dark_percentage=dark_percentage(dark_count, image_count),
            )
        )
    return DatasetDarkStats(classes=classes, skipped=skipped)


def format_stats_table(stats: DatasetDarkStats) -> str:
    """Render the per-class counts/percentages as a fixed-width text table."""
    header = f"{'class':<20} {'images':>8} {'dark':>8} {'dark %':>8}"
    lines = [header, "-" * len(header)]
    for entry in stats.classes:
        pct = "n/a" if entry.dark_percentage is None else f"{entry.dark_percentage:.1f}%"
        lines.append(
            f"{entry.class_name:<20} {entry.image_count:>8} {entry.dark_count:>8} {pct:>8}"
        )
    if stats.skipped:
        lines.append(f"skipped {len(stats.skipped)} unreadable file(s)")
    return "\n".join(lines)
