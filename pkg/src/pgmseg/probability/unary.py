from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..colormodel import GmmModel, kl_gaussians_to_gmm
from .bandwidth import median_bandwidth


@dataclass(frozen=True)
class UnaryTable:
    """Unary assignment probabilities, rows ``[p(F), p(B)]`` per superpixel."""

    probabilities: np.ndarray  #: Array of shape (n, 2), rows sum to 1

    def __post_init__(self):
        if self.probabilities.ndim != 2 or self.probabilities.shape[1] != 2:
            raise ValueError(
                f"Unary table must have shape (n, 2), got {self.probabilities.shape}"
            )
        if np.any(self.probabilities < 0) or np.any(self.probabilities > 1):
            raise ValueError("Unary probabilities must be in [0, 1]")
        if not np.allclose(self.probabilities.sum(axis=1), 1, rtol=0, atol=1e-12):
            raise ValueError("Unary probabilities must sum to 1 per superpixel")

    def __len__(self) -> int:
        return len(self.probabilities)

    @property
    def foreground(self) -> np.ndarray:
        return self.probabilities[:, 0]

    @property
    def background(self) -> np.ndarray:
        return self.probabilities[:, 1]

    @classmethod
    def from_foreground(
        cls, p_foreground: np.ndarray, background: np.ndarray | None = None
    ) -> "UnaryTable":
        """
        Build table from foreground probabilities.

        Args:
            p_foreground: Foreground probability per superpixel, clipped to [0, 1]
            background: Boolean mask of superpixels constrained to the background ([0, 1])
        """
        p_f = np.clip(np.asarray(p_foreground, dtype=np.float64), 0, 1)
        if background is not None:
            p_f = np.where(background, 0.0, p_f)
        return cls(np.stack([p_f, 1 - p_f], axis=1))


def unary_from_divergences(
    d_foreground: np.ndarray,
    d_background: np.ndarray,
    sigma_f: float,
    sigma_b: float,
    background: np.ndarray | None = None,
) -> UnaryTable:
    """
    Normalized RBF pair ``[exp(-D_F / sigma_F), exp(-D_B / sigma_B)]`` per superpixel.

    Computed as a logistic function of the exponent difference, which is stable for large
    divergences.
    """
    if not (sigma_f > 0 and sigma_b > 0):
        raise ValueError(f"Bandwidths must be positive, got {sigma_f}, {sigma_b}")
    d_f = np.asarray(d_foreground, dtype=np.float64)
    d_b = np.asarray(d_background, dtype=np.float64)
    return UnaryTable.from_foreground(expit(d_b / sigma_b - d_f / sigma_f), background)


def unary_probabilities(
    mu: np.ndarray,
    sigma: np.ndarray,
    gmm_f: GmmModel,
    gmm_b: GmmModel,
    sigma_f: float,
    sigma_b: float,
    background: np.ndarray | None = None,
) -> UnaryTable:
    """
    Unary assignment probabilities from the class GMMs.

    ``p(F) ∝ exp(-D(G_i || GMM_F) / sigma_F)`` and ``p(B) ∝ exp(-D(G_i || GMM_B) / sigma_B)``,
    normalized per superpixel.

    Args:
        mu: Superpixel means of shape (n, 3)
        sigma: Superpixel covariances of shape (n, 3, 3)
        gmm_f: Foreground model
        gmm_b: Background model
        sigma_f: Foreground bandwidth
        sigma_b: Background bandwidth
        background: Boolean mask of superpixels constrained to the background,
            their rows are set to ``[0, 1]``

    Returns:
        Unary table
    """
    return unary_from_divergences(
        kl_gaussians_to_gmm(mu, sigma, gmm_f),
        kl_gaussians_to_gmm(mu, sigma, gmm_b),
        sigma_f,
        sigma_b,
        background,
    )


def unary_background_only(
    mu: np.ndarray,
    sigma: np.ndarray,
    gmm_b: GmmModel,
    background: np.ndarray,
    sigma_u: float | None = None,
) -> tuple[UnaryTable, float]:
    """
    Unary assignment probabilities estimated using only the background model.

    ``p(B) = exp(-D(G_i || GMM_B) / sigma_u)`` and ``p(F) = 1 - p(B)``.

    Args:
        mu: Superpixel means of shape (n, 3)
        sigma: Superpixel covariances of shape (n, 3, 3)
        gmm_b: Background model
        background: Boolean mask of background superpixels, constrained to ``[0, 1]``
        sigma_u: Bandwidth, default: median divergence of the background superpixels

    Returns:
        - Unary table
        - Bandwidth used

    Raises:
        ValueError: If the background is empty
    """
    if not np.any(background):
        raise ValueError("Background-only unary probabilities require a nonempty background")
    d_b = kl_gaussians_to_gmm(mu, sigma, gmm_b)
    if sigma_u is None:
        sigma_u = median_bandwidth(d_b[background])
    return unary_background_from_divergences(d_b, sigma_u, background), sigma_u


def unary_background_from_divergences(
    d_background: np.ndarray, sigma_u: float, background: np.ndarray | None = None
) -> UnaryTable:
    """Background-only unary table ``[1 - exp(-D_B / sigma_u), exp(-D_B / sigma_u)]``."""
    if not sigma_u > 0:
        raise ValueError(f"Bandwidth must be positive, got {sigma_u}")
    p_b = np.exp(-np.asarray(d_background, dtype=np.float64) / sigma_u)
    return UnaryTable.from_foreground(1 - p_b, background)
