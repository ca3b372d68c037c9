from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from sklearn.cluster import kmeans_plusplus

from .gaussian import EPS_COV, GaussianModel, fit_gaussian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GmmModel:
    """Gaussian mixture model with K weighted components."""

    weights: np.ndarray  #: Prior weights (alpha_k) of shape (K,), positive and summing to 1
    means: np.ndarray  #: Component means of shape (K, d)
    covariances: np.ndarray = field(repr=False)  #: Component covariances of shape (K, d, d)
    #: Mean log-likelihood per sample after initialization and after each EM iteration
    log_likelihood_history: tuple[float, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.weights) < 1:
            raise ValueError("GMM requires at least one component")
        if np.any(self.weights <= 0):
            raise ValueError(f"GMM weights must be positive, got {self.weights}")
        if abs(float(np.sum(self.weights)) - 1) > 1e-12:
            raise ValueError(f"GMM weights must sum to 1, got {np.sum(self.weights)}")
        if self.means.shape[0] != len(self.weights) or self.covariances.shape[0] != len(
            self.weights
        ):
            raise ValueError("Number of weights, means and covariances differ")

    @property
    def k(self) -> int:
        """Number of components."""
        return len(self.weights)

    @property
    def components(self) -> list[tuple[float, GaussianModel]]:
        """List of (prior weight, Gaussian component)."""
        return [
            (float(weight), GaussianModel(mean, covariance))
            for weight, mean, covariance in zip(self.weights, self.means, self.covariances)
        ]

    def score_samples(self, samples: np.ndarray) -> np.ndarray:
        """Log density of each sample under the mixture."""
        log_prob = _weighted_log_prob(
            np.asarray(samples, dtype=np.float64), self.weights, self.means, self.covariances
        )
        return logsumexp(log_prob, axis=1)


def _precision_cholesky(covariances: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper triangular factors U_k with ``U_k U_k^T = Sigma_k^-1`` and log-determinants."""
    chol = np.linalg.cholesky(covariances)
    log_det = 2 * np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2)), axis=1)
    return np.swapaxes(np.linalg.inv(chol), 1, 2), log_det


def _weighted_log_prob(
    samples: np.ndarray, weights: np.ndarray, means: np.ndarray, covariances: np.ndarray
) -> np.ndarray:
    """log(alpha_k) + log N(x | mu_k, Sigma_k) of shape (n, K)."""
    dim = samples.shape[1]
    prec_chol, log_det = _precision_cholesky(covariances)
    # whitened samples of shape (n, K, d)
    z = np.einsum("nd,kde->nke", samples, prec_chol) - np.einsum("kd,kde->ke", means, prec_chol)
    return (
        np.log(weights)
        - 0.5 * (dim * math.log(2 * math.pi) + log_det)
        - 0.5 * np.einsum("nke,nke->nk", z, z)
    )


def _clip_eigenvalues(covariance: np.ndarray, floor: float) -> np.ndarray:
    """Closest covariance (same eigenvectors) with all eigenvalues >= floor, also stacked."""
    symmetric = 0.5 * (covariance + np.swapaxes(covariance, -1, -2))
    eigenvalues, eigenvectors = np.linalg.eigh(symmetric)
    result = (eigenvectors * np.maximum(eigenvalues, floor)[..., None, :]) @ np.swapaxes(
        eigenvectors, -1, -2
    )
    return 0.5 * (result + np.swapaxes(result, -1, -2))


def _m_step(
    samples: np.ndarray, resp: np.ndarray, eps_cov: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = np.maximum(resp.sum(axis=0), np.finfo(np.float64).tiny)
    weights = counts / counts.sum()
    means = (resp.T @ samples) / counts[:, None]
    diff = samples[None, :, :] - means[:, None, :]
    covariances = np.einsum("nk,knd,kne->kde", resp, diff, diff) / counts[:, None, None]
    return weights, means, _clip_eigenvalues(covariances, eps_cov)


def fit_gmm(
    samples: np.ndarray,
    k: int,
    seed: int,
    *,
    max_iter: int = 100,
    tol: float = 1e-6,
    eps_cov: float = EPS_COV,
) -> GmmModel:
    """
    Fit a Gaussian mixture model with the EM algorithm.

    Means are initialized with seeded k-means++, all covariances with the sample covariance of
    the data and the weights uniformly.
    Component covariances are floored by clipping their eigenvalues at `eps_cov`, the
    constrained maximizer of the M-step, so the log-likelihood never decreases.
    Iterations stop if the gain of the mean log-likelihood is below `tol`.

    Args:
        samples: Samples of shape (n, d), e.g. LAB pixels
        k: Number of components
        seed: Seed of the k-means++ initialization
        max_iter: Maximum number of EM iterations. Default: 100
        tol: Convergence threshold of the log-likelihood gain. Default: 1e-6
        eps_cov: Covariance floor. Default: 1e-4

    Returns:
        Fitted GMM, including the log-likelihood history

    Raises:
        ValueError: If there are fewer than ``3 * k`` samples
    """
    data = np.asarray(samples, dtype=np.float64)
    if k < 1:
        raise ValueError(f"Number of components must be >= 1, got {k}")
    if data.ndim != 2 or len(data) < 3 * k:
        raise ValueError(f"GMM with {k} components requires >= {3 * k} samples, got {len(data)}")

    if k == 1:
        gaussian = fit_gaussian(data, eps_cov)
        weights = np.ones(1)
        log_likelihood = float(
            np.mean(_weighted_log_prob(data, weights, gaussian.mu[None], gaussian.sigma[None]))
        )
        return GmmModel(weights, gaussian.mu[None], gaussian.sigma[None], (log_likelihood,))

    means, _ = kmeans_plusplus(data, n_clusters=k, random_state=seed)
    means = means.astype(np.float64)
    covariance = _clip_eigenvalues(np.atleast_2d(np.cov(data.T, bias=True)), eps_cov)
    covariances = np.repeat(covariance[None], k, axis=0)
    weights = np.full(k, 1 / k)

    log_prob = _weighted_log_prob(data, weights, means, covariances)
    log_norm = logsumexp(log_prob, axis=1)
    history = [float(np.mean(log_norm))]
    for _ in range(max_iter):
        resp = np.exp(log_prob - log_norm[:, None])
        weights, means, covariances = _m_step(data, resp, eps_cov)
        log_prob = _weighted_log_prob(data, weights, means, covariances)
        log_norm = logsumexp(log_prob, axis=1)
        history.append(float(np.mean(log_norm)))
        if history[-1] - history[-2] < tol:
            break

    logger.debug(
        "EM with %d components: %d iterations, mean log-likelihood %.6f",
        k,
        len(history) - 1,
        history[-1],
    )
    return GmmModel(weights, means, covariances, tuple(history))
