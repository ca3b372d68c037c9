from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage import measure
from skimage.segmentation import watershed

from ..imagecore import LabImage
from .adjacency import label_map_adjacency, superpixel_label_map
from .datatypes import Superpixel

logger = logging.getLogger(__name__)

#: Superpixels smaller than this are merged into their most similar neighbor
MIN_SUPERPIXEL_SIZE = 5

#: Maximum number of passes of the boundary pixel reassignment
BOUNDARY_PASSES = 10


def gradient_magnitude(lab: np.ndarray) -> np.ndarray:
    """
    Color gradient magnitude of a LAB image.

    Central differences per channel, Euclidean magnitude over rows, columns and the three
    LAB channels.
    """
    squared = np.zeros(lab.shape[:2], dtype=np.float64)
    for axis in (0, 1):
        if lab.shape[axis] < 2:
            continue
        squared += np.sum(np.gradient(lab, axis=axis) ** 2, axis=2)
    return np.sqrt(squared)


def _seed_markers(
    gradient: np.ndarray, target_sp_size: int, rng: np.random.Generator
) -> np.ndarray:
    """One marker per grid cell, drawn from the local gradient minima inside the cell."""
    height, width = gradient.shape
    n_markers = max(1, round(height * width / target_sp_size))
    step = math.sqrt(height * width / n_markers)
    row_edges = np.linspace(0, height, max(1, round(height / step)) + 1).astype(int)
    col_edges = np.linspace(0, width, max(1, round(width / step)) + 1).astype(int)

    local_min = gradient <= ndimage.minimum_filter(gradient, size=3, mode="nearest")
    markers = np.zeros((height, width), dtype=np.int32)
    label = 1
    for r0, r1 in zip(row_edges[:-1], row_edges[1:]):
        for c0, c1 in zip(col_edges[:-1], col_edges[1:]):
            if r1 <= r0 or c1 <= c0:
                continue
            candidates = np.flatnonzero(local_min[r0:r1, c0:c1])
            if len(candidates) == 0:
                candidates = np.arange((r1 - r0) * (c1 - c0))
            row, col = divmod(int(candidates[rng.integers(len(candidates))]), c1 - c0)
            markers[r0 + row, c0 + col] = label
            label += 1
    return markers


def _region_means(labels: np.ndarray, lab: np.ndarray, n: int) -> np.ndarray:
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n).astype(np.float64)
    sums = np.stack(
        [np.bincount(flat, weights=lab[..., c].ravel(), minlength=n) for c in range(3)], axis=1
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None]


def _merge_tiny_regions(labels: np.ndarray, lab: np.ndarray, min_size: int) -> np.ndarray:
    """Merge regions below `min_size` into the adjacent region with the closest mean color."""
    labels = labels.copy()
    while True:
        n = int(labels.max()) + 1
        sizes = np.bincount(labels.ravel(), minlength=n)
        present = np.flatnonzero(sizes)
        tiny = present[sizes[present] < min_size]
        if len(tiny) == 0 or len(present) == 1:
            return labels
        # smallest region first, ties by id
        source = int(tiny[np.lexsort((tiny, sizes[tiny]))[0]])
        graph = label_map_adjacency(labels, n)
        neighbors = np.concatenate(
            [
                graph.edges[graph.edges[:, 0] == source, 1],
                graph.edges[graph.edges[:, 1] == source, 0],
            ]
        )
        means = _region_means(labels, lab, n)
        distances = np.linalg.norm(means[neighbors] - means[source], axis=1)
        target = int(neighbors[np.lexsort((neighbors, distances))[0]])
        labels[labels == source] = target


# 4-neighborhood offsets (rows, columns): up, left, right, down
_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def _shifted(labels: np.ndarray, d_row: int, d_col: int) -> np.ndarray:
    """Label of the neighbor at offset (d_row, d_col), the own label outside the image."""
    padded = np.pad(labels, 1, mode="edge")
    height, width = labels.shape
    return padded[1 + d_row : 1 + d_row + height, 1 + d_col : 1 + d_col + width]


def _reassign_boundary_pixels(
    labels: np.ndarray, lab: np.ndarray, max_passes: int = BOUNDARY_PASSES
) -> np.ndarray:
    """
    Move pixels to the adjacent region with the closest mean color.

    Pixels on a color edge (e.g. rectangle corners, where the gradient peaks on both sides)
    can be flooded from the basin across the edge.
    Each pass compares every pixel with the mean colors of its own and its 4-neighbor regions
    and moves it to the closest one (the own region wins ties). Means are updated after each
    pass.
    """
    labels = labels.copy()
    for index in range(max_passes):
        means = _region_means(labels, lab, int(labels.max()) + 1)
        best_label = labels
        best_distance = np.sum((lab - means[labels]) ** 2, axis=2)
        for d_row, d_col in _OFFSETS:
            neighbor = _shifted(labels, d_row, d_col)
            distance = np.sum((lab - means[neighbor]) ** 2, axis=2)
            closer = (neighbor != labels) & (distance < best_distance)
            best_label = np.where(closer, neighbor, best_label)
            best_distance = np.where(closer, distance, best_distance)
        moved = int(np.count_nonzero(best_label != labels))
        if moved == 0:
            break
        logger.debug("Boundary pass %d: %d pixels reassigned", index + 1, moved)
        labels = best_label
    return labels


def _split_disconnected(labels: np.ndarray) -> np.ndarray:
    """Give every 4-connected component of a region its own label."""
    return measure.label(labels, background=-1, connectivity=1) - 1


def _relabel_raster_order(labels: np.ndarray) -> np.ndarray:
    """Relabel to 0..n-1 in order of first appearance (raster scan)."""
    flat = labels.ravel()
    unique, first_index = np.unique(flat, return_index=True)
    order = unique[np.argsort(first_index)]
    lookup = np.zeros(int(unique.max()) + 1, dtype=np.int64)
    lookup[order] = np.arange(len(order))
    return lookup[labels]


def superpixels_from_labels(labels: np.ndarray) -> list[Superpixel]:
    """Superpixels of a dense label image with ids 0..n-1."""
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat)
    splits = np.split(order, np.cumsum(counts)[:-1])
    return [Superpixel(id=index, pixel_ids=pixel_ids) for index, pixel_ids in enumerate(splits)]


def watershed_labels(
    image: LabImage,
    seed: int,
    target_sp_size: int = 200,
    *,
    min_size: int = MIN_SUPERPIXEL_SIZE,
) -> np.ndarray:
    """
    Watershed over-segmentation as dense label image.

    See `watershed_partition`.

    Returns:
        Integer label image with ids 0..n-1 in raster order of first appearance
    """
    if target_sp_size < 1:
        raise ValueError(f"Target superpixel size must be >= 1, got {target_sp_size}")
    rng = np.random.default_rng(seed)
    gradient = gradient_magnitude(image.lab)
    markers = _seed_markers(gradient, target_sp_size, rng)
    labels = watershed(gradient, markers, connectivity=1)
    labels = _merge_tiny_regions(labels, image.lab, min_size)
    labels = _split_disconnected(_reassign_boundary_pixels(labels, image.lab))
    labels = _merge_tiny_regions(labels, image.lab, min_size)
    labels = _relabel_raster_order(labels)
    logger.debug(
        "Watershed: %d markers, %d superpixels after merging regions < %d px",
        markers.max(),
        labels.max() + 1,
        min_size,
    )
    return labels


def watershed_partition(
    image: LabImage,
    seed: int,
    target_sp_size: int = 200,
    *,
    min_size: int = MIN_SUPERPIXEL_SIZE,
) -> list[Superpixel]:
    """
    Partition an image into superpixels by marker-based watershed.

    The watershed floods the LAB color gradient magnitude from markers.
    Markers are drawn at random (seeded) among the local gradient minima of a regular grid of
    cells, about ``width * height / target_sp_size`` of them.
    Pixels on region boundaries are moved to the adjacent region with the closest mean color,
    regions split by the moves are separated into their connected components.
    Regions smaller than `min_size` pixels are merged into their most similar neighbor.

    Args:
        image: Input image
        seed: Seed of the marker sampling; identical (image, seed) give identical partitions
        target_sp_size: Approximate superpixel size in pixels. Default: 200
        min_size: Minimum superpixel size. Default: 5

    Returns:
        Disjoint cover of the image by 4-connected superpixels
    """
    return superpixels_from_labels(
        watershed_labels(image, seed, target_sp_size, min_size=min_size)
    )


def save_label_map(
    superpixels: Sequence[Superpixel], shape: tuple[int, int], path: str | Path, seed: int = 0
):
    """
    Save superpixels as PNG with a random color per superpixel (for debugging).

    Args:
        superpixels: Disjoint cover of the image
        shape: Image dimensions (height, width)
        path: Output PNG file
        seed: Seed of the color palette
    """
    label_map = superpixel_label_map(superpixels, shape)
    palette = np.random.default_rng(seed).integers(0, 256, size=(len(superpixels), 3))
    Image.fromarray(palette[label_map].astype(np.uint8)).save(path, format="PNG")
