from __future__ import annotations

from typing import Sequence

import numpy as np

from .datatypes import AdjacencyGraph, Superpixel


def superpixel_label_map(superpixels: Sequence[Superpixel], shape: tuple[int, int]) -> np.ndarray:
    """
    Dense label image of a superpixel cover.

    Args:
        superpixels: Superpixels with ids 0..n-1
        shape: Image dimensions (height, width)

    Returns:
        Integer array of superpixel ids, shape (height, width)

    Raises:
        ValueError: If superpixels overlap or do not cover the image
    """
    size = shape[0] * shape[1]
    label_map = np.full(size, -1, dtype=np.int64)
    claimed = np.zeros(size, dtype=np.int64)
    for superpixel in superpixels:
        label_map[superpixel.pixel_ids] = superpixel.id
        np.add.at(claimed, superpixel.pixel_ids, 1)
    if np.any(claimed > 1):
        raise ValueError(f"Superpixels overlap in {np.count_nonzero(claimed > 1)} pixels")
    if np.any(claimed == 0):
        raise ValueError(f"Superpixels do not cover {np.count_nonzero(claimed == 0)} pixels")
    return label_map.reshape(shape)


def label_map_adjacency(label_map: np.ndarray, n: int | None = None) -> AdjacencyGraph:
    """Adjacency graph of a dense label image (4-connectivity)."""
    horizontal = np.stack([label_map[:, :-1].ravel(), label_map[:, 1:].ravel()], axis=1)
    vertical = np.stack([label_map[:-1, :].ravel(), label_map[1:, :].ravel()], axis=1)
    pairs = np.concatenate([horizontal, vertical])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.sort(pairs, axis=1)
    edges = np.unique(pairs, axis=0) if len(pairs) else np.empty((0, 2), dtype=np.int64)
    if n is None:
        n = int(label_map.max()) + 1
    return AdjacencyGraph(n, edges.astype(np.int64))


def superpixel_adjacency(
    superpixels: Sequence[Superpixel], shape: tuple[int, int]
) -> AdjacencyGraph:
    """
    Build the spatial adjacency graph of superpixels.

    Two superpixels are adjacent if they share at least one 4-neighbor pixel pair.

    Args:
        superpixels: Disjoint cover of the image
        shape: Image dimensions (height, width)

    Returns:
        Symmetric adjacency graph without self-loops

    Raises:
        ValueError: If superpixels overlap or do not cover the image
    """
    return label_map_adjacency(superpixel_label_map(superpixels, shape), len(superpixels))
