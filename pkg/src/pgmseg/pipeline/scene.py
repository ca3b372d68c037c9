from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..colormodel import GaussianModel, fit_gaussian_stack
from ..imagecore import LabImage, SegMask, TriMap, TrimapLabel
from ..probability import PairwiseEdges, adjacency_divergences, select_pairwise_neighbors
from ..superpixel import (
    AdjacencyGraph,
    Superpixel,
    label_map_adjacency,
    superpixels_from_labels,
    watershed_labels,
)
from .config import SegConfig

logger = logging.getLogger(__name__)

# tie order of the majority trimap state
_STATE_PRIORITY = (TrimapLabel.UNKNOWN, TrimapLabel.FOREGROUND, TrimapLabel.BACKGROUND)


@dataclass
class SuperpixelScene:
    """
    Everything about the superpixels of one run that stays fixed during refinement.

    The superpixel Gaussians, their adjacency and the symmetric divergences of the selected
    neighbor pairs are computed once.
    """

    shape: tuple[int, int]  #: Image dimensions (height, width)
    superpixels: list[Superpixel] = field(repr=False)  #: Superpixels with ids 0..n-1
    label_map: np.ndarray = field(repr=False)  #: Superpixel id per pixel
    mu: np.ndarray = field(repr=False)  #: Superpixel means of shape (n, 3)
    sigma: np.ndarray = field(repr=False)  #: Superpixel covariances of shape (n, 3, 3)
    trimap_state: np.ndarray = field(repr=False)  #: Majority `TrimapLabel` per superpixel
    adjacency: AdjacencyGraph = field(repr=False)  #: Spatial adjacency
    edges: PairwiseEdges = field(repr=False)  #: Selected neighbor pairs

    @property
    def n(self) -> int:
        """Number of superpixels."""
        return len(self.superpixels)

    def state_mask(self, label: TrimapLabel) -> np.ndarray:
        """Boolean mask of superpixels with the given trimap state."""
        return self.trimap_state == label

    @property
    def background(self) -> np.ndarray:
        """Superpixels constrained to the background."""
        return self.state_mask(TrimapLabel.BACKGROUND)

    def pixel_mask(self, selected: np.ndarray) -> np.ndarray:
        """Flat pixel mask of the selected superpixels (boolean mask of shape (n,))."""
        return selected[self.label_map.ravel()]

    def to_mask(self, labels: np.ndarray) -> SegMask:
        """Per-pixel mask from superpixel labels (True = foreground)."""
        return SegMask(np.asarray(labels, dtype=bool)[self.label_map])


def majority_trimap_state(label_map: np.ndarray, trimap: TriMap, n: int) -> np.ndarray:
    """
    Majority trimap label of the pixels of each superpixel.

    Ties are resolved in the order unknown, foreground, background.
    """
    flat = label_map.ravel()
    trimap_flat = trimap.labels.ravel()
    counts = np.stack(
        [np.bincount(flat[trimap_flat == state], minlength=n) for state in _STATE_PRIORITY],
        axis=1,
    )
    states = np.array([state.value for state in _STATE_PRIORITY], dtype=np.uint8)
    return states[np.argmax(counts, axis=1)]


def prepare_scene(
    image: LabImage, trimap: TriMap, config: SegConfig, seed: int
) -> SuperpixelScene:
    """
    Over-segment the image and compute all quantities fixed within a run.

    Args:
        image: Input image
        trimap: Trimap of the same dimensions
        config: Segmentation parameters (`target_sp_size`, `m`)
        seed: Seed of the watershed markers

    Returns:
        Superpixel scene
    """
    if trimap.shape != image.shape:
        raise ValueError(f"Trimap shape {trimap.shape} does not match image shape {image.shape}")
    label_map = watershed_labels(image, seed, config.target_sp_size)
    superpixels = superpixels_from_labels(label_map)
    n = len(superpixels)
    mu, sigma = fit_gaussian_stack(image.pixels(), label_map.ravel(), n)
    trimap_state = majority_trimap_state(label_map, trimap, n)
    for superpixel in superpixels:
        superpixel.gaussian = GaussianModel(mu[superpixel.id], sigma[superpixel.id])
        superpixel.trimap_state = TrimapLabel(int(trimap_state[superpixel.id]))

    adjacency = label_map_adjacency(label_map, n)
    distances = adjacency_divergences(adjacency, mu, sigma)
    edges = select_pairwise_neighbors(adjacency, distances, config.m)
    logger.debug(
        "Scene: %d superpixels, %d adjacent pairs, %d selected pairs",
        n,
        len(adjacency),
        len(edges),
    )
    return SuperpixelScene(
        shape=image.shape,
        superpixels=superpixels,
        label_map=label_map,
        mu=mu,
        sigma=sigma,
        trimap_state=trimap_state,
        adjacency=adjacency,
        edges=edges,
    )
