"""Kullback-Leibler divergences between Gaussians and Gaussian mixtures."""

from __future__ import annotations

import numpy as np

from .gaussian import GaussianModel
from .gmm import GmmModel


def _cholesky(sigma: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise ValueError("Covariance matrix is not positive definite") from e


def _log_det(chol: np.ndarray) -> np.ndarray:
    return 2 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)


def kl_gaussian_batch(
    mu_i: np.ndarray, sigma_i: np.ndarray, mu_j: np.ndarray, sigma_j: np.ndarray
) -> np.ndarray:
    """
    Kullback-Leibler divergence D(G_i || G_j) of stacked Gaussians.

    Inputs broadcast against each other, means of shape (..., d) and covariances of
    shape (..., d, d).

    Returns:
        Nonnegative divergences of the broadcast shape (...)

    Raises:
        ValueError: If a covariance matrix is not positive definite
    """
    mu_i, mu_j = np.asarray(mu_i, dtype=np.float64), np.asarray(mu_j, dtype=np.float64)
    sigma_i, sigma_j = np.asarray(sigma_i, dtype=np.float64), np.asarray(sigma_j, dtype=np.float64)
    dim = mu_i.shape[-1]
    log_det_i = _log_det(_cholesky(sigma_i))
    log_det_j = _log_det(_cholesky(sigma_j))
    diff = mu_j - mu_i
    batch = np.broadcast_shapes(diff.shape[:-1], sigma_i.shape[:-2], sigma_j.shape[:-2])
    diff = np.broadcast_to(diff, batch + (dim,))
    sigma_i = np.broadcast_to(sigma_i, batch + (dim, dim))
    sigma_j = np.broadcast_to(sigma_j, batch + (dim, dim))
    trace = np.trace(np.linalg.solve(sigma_j, sigma_i), axis1=-2, axis2=-1)
    maha = np.einsum("...i,...i->...", diff, np.linalg.solve(sigma_j, diff[..., None])[..., 0])
    divergence = 0.5 * (log_det_j - log_det_i + trace + maha - dim)
    return np.maximum(divergence, 0.0)


def sym_kl_gaussian_batch(
    mu_i: np.ndarray, sigma_i: np.ndarray, mu_j: np.ndarray, sigma_j: np.ndarray
) -> np.ndarray:
    """Symmetric divergence ``min(D(G_i || G_j), D(G_j || G_i))`` of stacked Gaussians."""
    return np.minimum(
        kl_gaussian_batch(mu_i, sigma_i, mu_j, sigma_j),
        kl_gaussian_batch(mu_j, sigma_j, mu_i, sigma_i),
    )


def kl_gaussians_to_gmm(mu: np.ndarray, sigma: np.ndarray, gmm: GmmModel) -> np.ndarray:
    """
    Approximate divergence of stacked Gaussians to a GMM.

    ``min_k (D(G_i || o_k) - log(alpha_k))`` over the components o_k with weights alpha_k.

    Args:
        mu: Means of shape (n, d)
        sigma: Covariances of shape (n, d, d)
        gmm: Mixture model

    Returns:
        Divergences of shape (n,)
    """
    divergence = kl_gaussian_batch(
        mu[:, None, :], sigma[:, None, :, :], gmm.means[None, :, :], gmm.covariances[None, :, :, :]
    )
    return np.min(divergence - np.log(gmm.weights)[None, :], axis=1)


def kl_gaussian(g_i: GaussianModel, g_j: GaussianModel) -> float:
    """
    Kullback-Leibler divergence D(G_i || G_j) of two Gaussians.

    ``0.5 * (log(|S_j| / |S_i|) + tr(S_j^-1 S_i) + (m_j - m_i)^T S_j^-1 (m_j - m_i) - d)``,
    zero for identical Gaussians.

    Raises:
        ValueError: If a covariance matrix is not positive definite
    """
    return float(kl_gaussian_batch(g_i.mu, g_i.sigma, g_j.mu, g_j.sigma))


def sym_kl_gaussian(g_i: GaussianModel, g_j: GaussianModel) -> float:
    """Symmetric divergence, the minimum of both directed divergences."""
    return min(kl_gaussian(g_i, g_j), kl_gaussian(g_j, g_i))


def kl_gaussian_to_gmm(g: GaussianModel, gmm: GmmModel) -> float:
    """Approximate divergence of a Gaussian to a GMM, see `kl_gaussians_to_gmm`."""
    return float(kl_gaussians_to_gmm(g.mu[None], g.sigma[None], gmm)[0])
