from __future__ import annotations

import logging
from dataclasses import dataclass, fields, replace

import numpy as np

from ..colormodel import GmmModel, kl_gaussians_to_gmm

logger = logging.getLogger(__name__)

#: Lower bound of all RBF bandwidths
BANDWIDTH_FLOOR = 1e-8


@dataclass(frozen=True)
class Bandwidths:
    """
    RBF bandwidths in units of KL divergence.

    The initial bandwidths `sigma_u` and `sigma_p` are estimated once from the trimap, the
    per-class bandwidths are refined in each iteration from the current labeling.
    """

    sigma_u: float  #: Initial unary bandwidth
    sigma_u_f: float  #: Unary bandwidth of the foreground model
    sigma_u_b: float  #: Unary bandwidth of the background model
    sigma_p: float  #: Initial pairwise bandwidth
    sigma_p_f: float  #: Pairwise bandwidth of foreground/foreground edges
    sigma_p_b: float  #: Pairwise bandwidth of background/background edges
    sigma_p_bf: float  #: Pairwise bandwidth of mixed edges

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"Bandwidth {f.name} must be positive, got {value}")

    @classmethod
    def initial(cls, sigma_u: float, sigma_p: float) -> "Bandwidths":
        """Bandwidths with all refined values set to the initial estimates."""
        return cls(
            sigma_u=sigma_u,
            sigma_u_f=sigma_u,
            sigma_u_b=sigma_u,
            sigma_p=sigma_p,
            sigma_p_f=sigma_p,
            sigma_p_b=sigma_p,
            sigma_p_bf=sigma_p,
        )

    def replace(self, **changes) -> "Bandwidths":
        return replace(self, **changes)


def median_bandwidth(distances: np.ndarray) -> float:
    """
    Robust bandwidth estimate: median of distances, floored at `BANDWIDTH_FLOOR`.

    Even counts use the mean of the two middle values.

    Raises:
        ValueError: If no distances are given
    """
    values = np.asarray(distances, dtype=np.float64)
    if values.size == 0:
        raise ValueError("Cannot estimate bandwidth from an empty set of distances")
    return max(float(np.median(values)), BANDWIDTH_FLOOR)


def mean_bandwidth(distances: np.ndarray) -> float:
    """
    Average distance, floored at `BANDWIDTH_FLOOR`.

    Raises:
        ValueError: If no distances are given
    """
    values = np.asarray(distances, dtype=np.float64)
    if values.size == 0:
        raise ValueError("Cannot estimate bandwidth from an empty set of distances")
    return max(float(np.mean(values)), BANDWIDTH_FLOOR)


def estimate_sigma_u_initial(mu: np.ndarray, sigma: np.ndarray, gmm: GmmModel) -> float:
    """
    Initial unary bandwidth from the superpixels the class model was trained on.

    Median of the approximate divergences of the superpixel Gaussians to the class GMM.

    Args:
        mu: Superpixel means of shape (n, 3)
        sigma: Superpixel covariances of shape (n, 3, 3)
        gmm: Class model

    Raises:
        ValueError: If no superpixels are given
    """
    if len(mu) == 0:
        raise ValueError("Cannot estimate unary bandwidth of an empty region")
    value = median_bandwidth(kl_gaussians_to_gmm(mu, sigma, gmm))
    logger.debug("Initial unary bandwidth: %g (%d superpixels)", value, len(mu))
    return value


def estimate_sigma_p(distances: np.ndarray) -> float:
    """
    Initial pairwise bandwidth: median symmetric divergence of the selected neighbor pairs.

    Raises:
        ValueError: If no edges are given
    """
    if len(distances) == 0:
        raise ValueError("Cannot estimate pairwise bandwidth without edges")
    value = median_bandwidth(distances)
    logger.debug("Initial pairwise bandwidth: %g (%d edges)", value, len(distances))
    return value
