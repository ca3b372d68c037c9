from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from skimage.color import rgb2lab

from .datatypes import LabImage


def read_image(path: str | Path) -> np.ndarray:
    """
    Read PNG/JPEG image as 8-bit RGB array.

    Grayscale, palette and RGBA images are converted to RGB (alpha is dropped).

    Args:
        path: Image file

    Returns:
        Array of shape (height, width, 3) with dtype `np.uint8`
    """
    with Image.open(path) as image:
        return np.asarray(image.convert("RGB"), dtype=np.uint8)


def srgb_to_lab(rgb: np.ndarray) -> LabImage:
    """
    Convert an 8-bit sRGB image to CIELAB.

    sRGB gamma decoding, linear RGB to CIEXYZ and CIEXYZ to CIELAB with the D65 white point
    (2° observer).

    Args:
        rgb: Array of shape (height, width, 3) with dtype `np.uint8`

    Returns:
        CIELAB image with L in [0, 100]

    Raises:
        ValueError: If the image is empty or not an 8-bit RGB image
    """
    if rgb.dtype != np.uint8:
        raise ValueError(f"Expected 8-bit RGB image, got dtype {rgb.dtype}")
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"Expected RGB image of shape (height, width, 3), got {rgb.shape}")
    if rgb.shape[0] * rgb.shape[1] == 0:
        raise ValueError("Image must not be empty")
    lab = rgb2lab(rgb.astype(np.float64) / 255.0, illuminant="D65", observer="2")
    return LabImage(lab.astype(np.float64, copy=False))
