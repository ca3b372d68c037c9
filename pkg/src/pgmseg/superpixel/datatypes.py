from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..colormodel import GaussianModel
from ..imagecore import TrimapLabel


@dataclass
class Superpixel:
    """Connected pixel region, the atomic unit of labeling."""

    id: int  #: Index of the superpixel
    pixel_ids: np.ndarray = field(repr=False)  #: Sorted flat (raster) pixel indices
    gaussian: GaussianModel | None = field(default=None, repr=False)  #: LAB color model
    trimap_state: TrimapLabel = TrimapLabel.UNKNOWN  #: Majority trimap label of its pixels

    @property
    def size(self) -> int:
        """Number of pixels."""
        return len(self.pixel_ids)


@dataclass(frozen=True)
class AdjacencyGraph:
    """Spatial 4-neighborhood adjacency between superpixels."""

    n: int  #: Number of superpixels
    edges: np.ndarray  #: Unordered pairs (i < j) of shape (k, 2), sorted lexicographically

    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = sorted(pair)
        return bool(np.any((self.edges[:, 0] == i) & (self.edges[:, 1] == j)))

    def __len__(self) -> int:
        return len(self.edges)

    def neighbors(self, index: int) -> np.ndarray:
        """Sorted ids of superpixels adjacent to `index`."""
        left = self.edges[self.edges[:, 0] == index, 1]
        right = self.edges[self.edges[:, 1] == index, 0]
        return np.sort(np.concatenate([left, right]))

    def degree(self) -> np.ndarray:
        """Number of neighbors per superpixel."""
        return np.bincount(self.edges.ravel(), minlength=self.n)
