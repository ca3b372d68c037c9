from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .._numba import USE_NUMBA, njit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarginalTable:
    """Marginal label probabilities, rows ``[p(F), p(B)]`` per superpixel."""

    probabilities: np.ndarray  #: Array of shape (n, 2), rows sum to 1

    def __post_init__(self):
        if self.probabilities.ndim != 2 or self.probabilities.shape[1] != 2:
            raise ValueError(
                f"Marginal table must have shape (n, 2), got {self.probabilities.shape}"
            )
        if np.any(self.probabilities < 0):
            raise ValueError("Marginal probabilities must be nonnegative")
        if not np.allclose(self.probabilities.sum(axis=1), 1, rtol=0, atol=1e-12):
            raise ValueError("Marginal probabilities must sum to 1 per superpixel")

    def __len__(self) -> int:
        return len(self.probabilities)

    @property
    def foreground(self) -> np.ndarray:
        return self.probabilities[:, 0]

    @property
    def background(self) -> np.ndarray:
        return self.probabilities[:, 1]


def _power_iteration_numpy(
    matrix: sparse.csr_matrix, shift: float, tol: float, max_iter: int
) -> tuple[np.ndarray, int]:
    vector = np.ones(matrix.shape[0]) / math.sqrt(matrix.shape[0])
    for iteration in range(1, max_iter + 1):
        product = matrix @ vector + shift * vector
        norm = np.linalg.norm(product)
        if norm == 0:
            return vector, iteration
        product /= norm
        delta = np.max(np.abs(product - vector))
        vector = product
        if delta < tol:
            return vector, iteration
    return vector, max_iter


@njit
def _power_iteration_numba(
    indptr: np.ndarray,
    indices: np.ndarray,
    data: np.ndarray,
    shift: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int]:
    n = len(indptr) - 1
    vector = np.full(n, 1 / math.sqrt(n))
    product = np.zeros(n)
    for iteration in range(1, max_iter + 1):
        norm = 0.0
        for row in range(n):
            value = shift * vector[row]
            for k in range(indptr[row], indptr[row + 1]):
                value += data[k] * vector[indices[k]]
            product[row] = value
            norm += value * value
        if norm == 0:
            return vector, iteration
        norm = math.sqrt(norm)
        delta = 0.0
        for row in range(n):
            value = product[row] / norm
            delta = max(delta, abs(value - vector[row]))
            vector[row] = value
        if delta < tol:
            return vector, iteration
    return vector, max_iter


def _as_csr(matrix) -> sparse.csr_matrix:
    result = sparse.csr_matrix(matrix, dtype=np.float64)
    result.sum_duplicates()
    result.sort_indices()
    return result


def power_iteration(
    matrix: np.ndarray | sparse.spmatrix, tol: float = 1e-10, max_iter: int = 1000
) -> tuple[np.ndarray, int]:
    """
    Leading eigenvector of a symmetric nonnegative matrix by power iteration.

    The iteration starts from the normalized all-ones vector and uses the shifted matrix
    ``A + s * I`` with ``s`` half the maximum absolute row sum. The shift leaves the
    eigenvectors unchanged and separates the Perron root from a possible eigenvalue of equal
    magnitude and opposite sign (bipartite supports).

    Args:
        matrix: Dense or sparse square matrix
        tol: Stop if successive normalized iterates differ less (max-norm). Default: 1e-10
        max_iter: Maximum number of iterations. Default: 1000

    Returns:
        - Eigenvector with unit Euclidean norm and nonnegative orientation
        - Number of iterations
    """
    csr = _as_csr(matrix)
    if csr.shape[0] != csr.shape[1] or csr.shape[0] == 0:
        raise ValueError(f"Matrix must be square and nonempty, got shape {csr.shape}")
    shift = 0.5 * float(np.max(np.abs(csr).sum(axis=1))) if csr.nnz else 0.0
    if USE_NUMBA:
        vector, iterations = _power_iteration_numba(
            csr.indptr, csr.indices, csr.data, shift, tol, max_iter
        )
    else:
        vector, iterations = _power_iteration_numpy(csr, shift, tol, max_iter)
    if np.sum(vector) < 0:
        vector = -vector
    logger.debug("Power iteration converged after %d iterations", iterations)
    return vector, iterations


def _check_assignment_matrix(csr: sparse.csr_matrix):
    if csr.shape[0] != csr.shape[1] or csr.shape[0] % 2 != 0:
        raise ValueError(f"Assignment matrix must be square with even size, got {csr.shape}")
    if csr.nnz and csr.data.min() < 0:
        raise ValueError("Assignment matrix must be nonnegative")
    asymmetry = abs(csr - csr.T)
    if asymmetry.nnz and asymmetry.max() > 1e-12 * max(1.0, float(np.max(csr.data))):
        raise ValueError("Assignment matrix must be symmetric")


def sgm_marginals(
    matrix: np.ndarray | sparse.spmatrix, tol: float = 1e-10, max_iter: int = 1000
) -> MarginalTable:
    """
    Marginal label probabilities by spectral graph matching.

    The marginals of superpixel i are the normalized entries ``[v[2i], v[2i + 1]]`` of the
    leading eigenvector v of the assignment matrix. Superpixels with a zero entry pair get
    ``[0.5, 0.5]``.

    Args:
        matrix: Symmetric nonnegative 2n x 2n assignment matrix (dense or sparse)
        tol: Convergence threshold of the power iteration
        max_iter: Maximum number of power iterations

    Returns:
        Marginal table

    Raises:
        ValueError: If the matrix is not square, symmetric and nonnegative
    """
    csr = _as_csr(matrix)
    _check_assignment_matrix(csr)
    vector, _ = power_iteration(csr, tol, max_iter)
    pairs = np.maximum(vector, 0).reshape(-1, 2)
    sums = pairs.sum(axis=1)
    probabilities = np.full(pairs.shape, 0.5)
    valid = sums > 0
    probabilities[valid] = pairs[valid] / sums[valid, None]
    return MarginalTable(probabilities)


def ml_labels(marginals: MarginalTable) -> np.ndarray:
    """
    Maximum likelihood labels.

    Returns:
        Boolean array, True (foreground) iff ``p(F) > p(B)``, ties are background
    """
    return marginals.foreground > marginals.background
