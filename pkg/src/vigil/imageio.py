"""PNG/JPEG decode and encode at the pipeline boundary.

Only these two formats are accepted; everything internal circulates as
Raster. Sources with other channel layouts are converted to RGB on decode.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InputError
from .raster import Raster

_ACCEPTED_FORMATS = {"PNG", "JPEG"}


def decode_image_bytes(data: bytes) -> Raster:
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in _ACCEPTED_FORMATS:
                raise InputError(f"unsupported image format {img.format}; only PNG and JPEG are accepted")
            rgb = img.convert("RGB")
            return Raster.from_array(np.asarray(rgb))
    except UnidentifiedImageError as exc:
        raise InputError(f"not a decodable image: {exc}") from exc
    except OSError as exc:
        raise InputError(f"image decode failed: {exc}") from exc


def decode_image_file(path: str | Path) -> Raster:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read image file {path}: {exc}") from exc
    return decode_image_bytes(data)


def encode_png(img: Raster) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels).save(buf, format="PNG")
    return buf.getvalue()


def write_png(img: Raster, path: str | Path) -> None:
    Path(path).write_bytes(encode_png(img))
