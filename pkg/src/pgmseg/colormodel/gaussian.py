from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Covariance regularization floor, added to sample covariances (``EPS_COV * I``)
EPS_COV = 1e-4


@dataclass(frozen=True)
class GaussianModel:
    """Gaussian color model (mean and covariance) of a set of LAB pixels."""

    mu: np.ndarray  #: Mean vector of shape (d,)
    sigma: np.ndarray = field(repr=False)  #: Symmetric positive-definite covariance (d, d)

    def __post_init__(self):
        if self.mu.ndim != 1 or self.sigma.shape != (len(self.mu), len(self.mu)):
            raise ValueError(
                f"Incompatible shapes of mean {self.mu.shape} and covariance {self.sigma.shape}"
            )

    @property
    def dim(self) -> int:
        return len(self.mu)


def fit_gaussian(pixels: np.ndarray, eps_cov: float = EPS_COV) -> GaussianModel:
    """
    Fit a Gaussian to pixel values.

    The covariance uses the population convention (divide by n) and is regularized by
    ``eps_cov * I``.

    Args:
        pixels: Array of shape (n, d), e.g. LAB triplets
        eps_cov: Covariance floor. Default: 1e-4

    Returns:
        Gaussian model

    Raises:
        ValueError: If the pixel set is empty
    """
    samples = np.asarray(pixels, dtype=np.float64)
    if samples.ndim != 2 or len(samples) == 0:
        raise ValueError("Cannot fit Gaussian to an empty pixel set")
    mu = samples.mean(axis=0)
    diff = samples - mu
    sigma = diff.T @ diff / len(samples)
    sigma = 0.5 * (sigma + sigma.T) + eps_cov * np.eye(samples.shape[1])
    return GaussianModel(mu, sigma)


def fit_gaussian_stack(
    pixels: np.ndarray, labels: np.ndarray, n: int, eps_cov: float = EPS_COV
) -> tuple[np.ndarray, np.ndarray]:
    """
    Fit one Gaussian per label in a single pass (same estimator as `fit_gaussian`).

    Args:
        pixels: Pixel values of shape (p, d)
        labels: Label of each pixel in 0..n-1, shape (p,)
        n: Number of labels, every label must occur at least once
        eps_cov: Covariance floor. Default: 1e-4

    Returns:
        - Means of shape (n, d)
        - Covariances of shape (n, d, d)
    """
    samples = np.asarray(pixels, dtype=np.float64)
    dim = samples.shape[1]
    counts = np.bincount(labels, minlength=n).astype(np.float64)
    if np.any(counts == 0):
        raise ValueError(f"Cannot fit Gaussian to empty label(s) {np.flatnonzero(counts == 0)}")
    mu = np.stack(
        [np.bincount(labels, weights=samples[:, c], minlength=n) for c in range(dim)], axis=1
    )
    mu /= counts[:, None]
    diff = samples - mu[labels]
    sigma = np.empty((n, dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            value = np.bincount(labels, weights=diff[:, a] * diff[:, b], minlength=n) / counts
            sigma[:, a, b] = value
            sigma[:, b, a] = value
    sigma += eps_cov * np.eye(dim)
    return mu, sigma


def stack_gaussians(gaussians: Sequence[GaussianModel]) -> tuple[np.ndarray, np.ndarray]:
    """Stack Gaussian models to arrays of means (n, d) and covariances (n, d, d)."""
    if len(gaussians) == 0:
        raise ValueError("No Gaussians to stack")
    return (
        np.stack([gaussian.mu for gaussian in gaussians]),
        np.stack([gaussian.sigma for gaussian in gaussians]),
    )


def unstack_gaussians(mu: np.ndarray, sigma: np.ndarray) -> list[GaussianModel]:
    """Inverse of `stack_gaussians`."""
    return [GaussianModel(m, s) for m, s in zip(mu, sigma)]
