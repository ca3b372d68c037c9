from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .datatypes import SegMask


def encode_mask(mask: SegMask) -> bytes:
    """
    Encodes mask to an 8-bit grayscale PNG (foreground = 255, background = 0).

    Args:
        mask: Segmentation mask

    Returns:
        PNG bytes
    """
    data_uint8 = np.where(mask.foreground, 255, 0).astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(data_uint8).save(buffer, format="PNG")
    return buffer.getvalue()


def decode_mask(data: bytes) -> SegMask:
    """
    Decodes mask from image bytes.

    Gray values >= 128 are foreground, everything else background.

    Args:
        data: Image bytes (PNG or any format readable by Pillow)

    Returns:
        Segmentation mask
    """
    with Image.open(io.BytesIO(data)) as image:
        data_uint8 = np.asarray(image.convert("L"), dtype=np.uint8)
    return SegMask(data_uint8 >= 128)


def write_mask(mask: SegMask, path: str | Path):
    """Write mask as PNG file."""
    Path(path).write_bytes(encode_mask(mask))


def read_mask(path: str | Path) -> SegMask:
    """Read mask (e.g. ground truth) from image file."""
    return decode_mask(Path(path).read_bytes())
