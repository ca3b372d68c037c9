from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..colormodel import sym_kl_gaussian_batch
from ..superpixel import AdjacencyGraph
from .bandwidth import Bandwidths
from .matrix import PairProbMatrix


@dataclass(frozen=True)
class PairwiseEdges:
    """Neighbor pairs carrying a pairwise term and their symmetric divergences."""

    edges: np.ndarray  #: Unordered pairs (i < j) of shape (k, 2), sorted lexicographically
    distances: np.ndarray  #: Symmetric KL divergence per pair, shape (k,)

    def __post_init__(self):
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise ValueError(f"Edges must have shape (k, 2), got {self.edges.shape}")
        if len(self.edges) != len(self.distances):
            raise ValueError("Number of edges and distances differ")

    def __len__(self) -> int:
        return len(self.edges)


def adjacency_divergences(graph: AdjacencyGraph, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Symmetric KL divergence of the superpixel Gaussians for every adjacency edge."""
    if len(graph) == 0:
        return np.empty(0)
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    return sym_kl_gaussian_batch(mu[i], sigma[i], mu[j], sigma[j])


def select_pairwise_neighbors(
    graph: AdjacencyGraph, distances: np.ndarray, m: int
) -> PairwiseEdges:
    """
    Keep the `m` most similar spatial neighbors of each superpixel.

    Each superpixel selects its `m` adjacent superpixels with the smallest symmetric
    divergence (ties by smaller neighbor id), the result is the union of all selections.
    Superpixels with fewer than `m` neighbors keep all of them.

    Args:
        graph: Spatial adjacency graph
        distances: Symmetric divergence per adjacency edge (same order as `graph.edges`)
        m: Number of neighbors

    Returns:
        Selected edges with their divergences
    """
    if m < 1:
        raise ValueError(f"Number of neighbors m must be >= 1, got {m}")
    distances = np.asarray(distances, dtype=np.float64)
    if len(distances) != len(graph):
        raise ValueError("Number of distances does not match number of adjacency edges")
    if len(graph) == 0:
        return PairwiseEdges(np.empty((0, 2), dtype=np.int64), np.empty(0))

    edge_index = np.arange(len(graph))
    source = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
    target = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
    directed_distance = np.concatenate([distances, distances])
    directed_edge = np.concatenate([edge_index, edge_index])

    order = np.lexsort((target, directed_distance, source))
    source_sorted = source[order]
    rank = np.arange(len(order)) - np.searchsorted(source_sorted, source_sorted, side="left")
    kept = np.unique(directed_edge[order][rank < m])
    return PairwiseEdges(graph.edges[kept], distances[kept])


def cross_class_divergences(
    mu: np.ndarray, sigma: np.ndarray, foreground: np.ndarray, chunk_size: int = 256
) -> np.ndarray:
    """
    Symmetric KL divergences of all pairs of a foreground and a background superpixel.

    Args:
        mu: Superpixel means of shape (n, d)
        sigma: Superpixel covariances of shape (n, d, d)
        foreground: Boolean labels, True = foreground
        chunk_size: Number of foreground superpixels per batch

    Returns:
        Flat array of ``|F| * |B|`` divergences
    """
    foreground = np.asarray(foreground, dtype=bool)
    mu_f, sigma_f = mu[foreground], sigma[foreground]
    mu_b, sigma_b = mu[~foreground], sigma[~foreground]
    if len(mu_f) == 0 or len(mu_b) == 0:
        return np.empty(0)
    parts = [
        sym_kl_gaussian_batch(
            mu_f[start : start + chunk_size, None],
            sigma_f[start : start + chunk_size, None],
            mu_b[None],
            sigma_b[None],
        ).ravel()
        for start in range(0, len(mu_f), chunk_size)
    ]
    return np.concatenate(parts)


def pairwise_probabilities(
    n: int, edges: PairwiseEdges, bandwidths: Bandwidths, refined: bool = False
) -> PairProbMatrix:
    """
    Pairwise assignment probabilities of the selected neighbor pairs.

    With the initial bandwidth and ``e = exp(-D / sigma_p)`` the probabilities of a pair are
    ``p(F, F) = p(B, B) = e / 2`` and ``p(F, B) = p(B, F) = (1 - e) / 2``,
    so that similar superpixels are likely to share a label and the four entries sum to 1.

    With refined bandwidths each entry uses the bandwidth of its label combination:
    ``p(F, F) ∝ exp(-D / sigma_p_f)``, ``p(B, B) ∝ exp(-D / sigma_p_b)`` and
    ``p(F, B) = p(B, F) ∝ 1 - exp(-D / sigma_p_bf)``, normalized to sum 1.
    Both forms agree if all bandwidths are equal.

    Args:
        n: Number of superpixels
        edges: Selected neighbor pairs
        bandwidths: RBF bandwidths
        refined: Use the per-class bandwidths instead of the initial `sigma_p`

    Returns:
        Pairwise probability matrix
    """
    distances = edges.distances
    if refined:
        same_f = np.exp(-distances / bandwidths.sigma_p_f)
        same_b = np.exp(-distances / bandwidths.sigma_p_b)
        different = -np.expm1(-distances / bandwidths.sigma_p_bf)
    else:
        same_f = same_b = np.exp(-distances / bandwidths.sigma_p)
        different = 1 - same_f
    total = same_f + same_b + 2 * different
    blocks = np.empty((len(edges), 2, 2))
    blocks[:, 0, 0] = same_f / total
    blocks[:, 1, 1] = same_b / total
    blocks[:, 0, 1] = different / total
    blocks[:, 1, 0] = different / total
    return PairProbMatrix(n, edges.edges, blocks)
