from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .datatypes import BoundingBox, Provenance, TriMap, TrimapLabel


def read_trimap(path: str | Path) -> np.ndarray:
    """
    Read trimap file as 8-bit grayscale array (0: background, 128: unknown, 255: foreground).
    """
    with Image.open(path) as image:
        return np.asarray(image.convert("L"), dtype=np.uint8)


def read_prior(path: str | Path) -> np.ndarray:
    """
    Read foreground probability map.

    Args:
        path: Either a ``.npy`` file with float values in [0, 1]
            or an 8-bit grayscale image (scaled by 1/255)

    Returns:
        Float array of foreground probabilities
    """
    path = Path(path)
    if path.suffix.lower() == ".npy":
        return np.load(path).astype(np.float64)
    with Image.open(path) as image:
        return np.asarray(image.convert("L"), dtype=np.float64) / 255.0


def build_trimap(
    shape: tuple[int, int],
    *,
    bbox: BoundingBox | None = None,
    trimap: np.ndarray | None = None,
    prior: np.ndarray | None = None,
    p0: float = 0.4,
) -> TriMap:
    """
    Build trimap from exactly one of a bounding box, a trimap array or a prior map.

    - **bbox**: pixels outside the box are background, inside unknown (no foreground)
    - **trimap**: values 0 (background), 128 (unknown), 255 (foreground)
    - **prior**: pixels with foreground probability < `p0` are background, the rest unknown

    Args:
        shape: Image dimensions (height, width)
        bbox: Foreground bounding box
        trimap: 8-bit trimap array
        prior: Foreground probability map
        p0: Background detection threshold for the prior map

    Returns:
        Trimap with its provenance

    Raises:
        ValueError: If not exactly one source is given, the box exceeds the image,
            dimensions mismatch or the trimap contains invalid values
    """
    sources = [source is not None for source in (bbox, trimap, prior)]
    if sum(sources) != 1:
        raise ValueError("Exactly one of bbox, trimap or prior must be given")

    if bbox is not None:
        bbox.check_within(shape)
        labels = np.full(shape, TrimapLabel.BACKGROUND, dtype=np.uint8)
        labels[bbox.slices()] = TrimapLabel.UNKNOWN
        return TriMap(labels, Provenance.BBOX, bbox)

    if trimap is not None:
        if trimap.shape != tuple(shape):
            raise ValueError(f"Trimap shape {trimap.shape} does not match image shape {shape}")
        return TriMap(trimap.astype(np.uint8), Provenance.TRIMAP_FILE)

    assert prior is not None
    if prior.shape != tuple(shape):
        raise ValueError(f"Prior map shape {prior.shape} does not match image shape {shape}")
    if not 0 <= p0 <= 1:
        raise ValueError(f"Threshold p0 must be in [0, 1], got {p0}")
    labels = np.where(prior < p0, TrimapLabel.BACKGROUND, TrimapLabel.UNKNOWN).astype(np.uint8)
    return TriMap(labels, Provenance.PRIOR_MAP)


def ring_mask(region: np.ndarray, width: int) -> np.ndarray:
    """
    Pixels outside a region within a Chebyshev distance of `width` to it.

    Args:
        region: Boolean mask of the region
        width: Ring width in pixels

    Returns:
        Boolean mask of the ring (excluding the region itself)
    """
    if not np.any(region):
        return np.zeros_like(region, dtype=bool)
    distance = ndimage.distance_transform_cdt(~region, metric="chessboard")
    return (~region) & (distance <= width)
