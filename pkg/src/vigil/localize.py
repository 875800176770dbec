"""Grid-based rudimentary localization.

Classify the whole image, then each tile of an R x C partition cropped from
the original full-resolution image, and flag the tiles whose label agrees
with the whole-image label. A 4x4 grid costs exactly 1 + 16 backend calls.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import annotate
from .classifier import Backend, ClassificationResult, classify
from .errors import BackendError, InputError, TileTooSmallError
from .raster import HARD_MIN_SIDE, Raster

HIGHLIGHT_COLOR = (64, 220, 64)
HIGHLIGHT_ALPHA = 0.2
BORDER_THICKNESS = 3


@dataclass(frozen=True)
class TileGrid:
    rows: int
    cols: int
    whole: ClassificationResult
    tiles: tuple[ClassificationResult, ...]
    match_mask: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.tiles) != self.rows * self.cols or len(self.match_mask) != len(self.tiles):
            raise InputError("tile grid is inconsistent with rows x cols")


def tile_bounds(width: int, height: int, rows: int, cols: int) -> list[tuple[int, int, int, int]]:
    """Row-major half-open rectangles (x0, y0, x1, y1) partitioning the image.

    Boundary i along an axis of size N with k cells sits at floor(i * N / k),
    so remainders spread deterministically.
    """
    if rows < 1 or cols < 1:
        raise InputError(f"grid must be at least 1x1, got {rows}x{cols}")
    if rows > height or cols > width:
        raise InputError(f"grid {rows}x{cols} exceeds image dimensions {width}x{height}")
    x_edges = [(c * width) // cols for c in range(cols + 1)]
    y_edges = [(r * height) // rows for r in range(rows + 1)]
    return [
        (x_edges[c], y_edges[r], x_edges[c + 1], y_edges[r + 1])
        for r in range(rows)
        for c in range(cols)
    ]


def localize(backend: Backend, img: Raster, rows: int = 4, cols: int = 4) -> TileGrid:
    """Whole-image classification first, then all rows x cols tiles unconditionally.

    Tiles are cropped from the original full-resolution image; each must be at
    least 32x32 before its own resize to the model input size.
    """
    bounds = tile_bounds(img.width, img.height, rows, cols)
    for index, (x0, y0, x1, y1) in enumerate(bounds):
        if x1 - x0 < HARD_MIN_SIDE or y1 - y0 < HARD_MIN_SIDE:
            raise TileTooSmallError(
                f"tile {index} is {x1 - x0}x{y1 - y0}, below the "
                f"{HARD_MIN_SIDE}x{HARD_MIN_SIDE} minimum for a {rows}x{cols} grid "
                f"on a {img.width}x{img.height} image"
            )
    whole = classify(backend, img)
    tiles: list[ClassificationResult] = []
    for index, (x0, y0, x1, y1) in enumerate(bounds):
        try:
            tiles.append(classify(backend, img.crop(x0, y0, x1, y1)))
        except BackendError as exc:
            raise BackendError(f"tile {index}: {exc}") from exc
    mask = tuple(tile.label == whole.label for tile in tiles)
    return TileGrid(rows=rows, cols=cols, whole=whole, tiles=tuple(tiles), match_mask=mask)


def render_localization(img: Raster, grid: TileGrid) -> Raster:
    """Full-resolution copy with matching tiles outlined, tinted, and captioned
    with their confidence; the whole-image result is captioned top-left.

    Pixels outside the matching-tile rectangles and the top-left caption box
    are never touched.
    """
    bounds = tile_bounds(img.width, img.height, grid.rows, grid.cols)
    pixels = img.pixels.copy()
    for rect, tile, matched in zip(bounds, grid.tiles, grid.match_mask):
        if not matched:
            continue
        annotate.tint_rect(pixels, rect, HIGHLIGHT_COLOR, HIGHLIGHT_ALPHA)
        annotate.draw_border(pixels, rect, HIGHLIGHT_COLOR, BORDER_THICKNESS)
        annotate.draw_label_box(
            pixels,
            rect[0] + BORDER_THICKNESS,
            rect[1] + BORDER_THICKNESS,
            f"{tile.confidence:.2f}",
            region=rect,
        )
    caption = f"{grid.whole.label.wire_name} {grid.whole.confidence:.2f}"
    annotate.draw_label_box(pixels, 0, 0, caption)
    return Raster(width=img.width, height=img.height, pixels=pixels)
