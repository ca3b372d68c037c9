from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy import sparse

if TYPE_CHECKING:
    from .unary import UnaryTable


@dataclass(frozen=True)
class PairProbMatrix:
    """
    Sparse pairwise assignment probabilities.

    Each stored pair (i, j) holds a 2x2 block ``[[p(F, F), p(F, B)], [p(B, F), p(B, B)]]``,
    rows indexing the label of superpixel i and columns the label of superpixel j.
    In the dense 2n x 2n matrix, superpixel i occupies index ``2 * i`` (foreground) and
    ``2 * i + 1`` (background).
    """

    n: int  #: Number of superpixels
    edges: np.ndarray  #: Unordered pairs (i < j) of shape (k, 2)
    blocks: np.ndarray = field(repr=False)  #: Probability blocks of shape (k, 2, 2)

    def __post_init__(self):
        if self.blocks.shape != (len(self.edges), 2, 2):
            raise ValueError(
                f"Blocks must have shape ({len(self.edges)}, 2, 2), got {self.blocks.shape}"
            )
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= self.n):
            raise ValueError(f"Edge indices out of range for {self.n} superpixels")
        if np.any(self.blocks < 0):
            raise ValueError("Pairwise probabilities must be nonnegative")

    def __len__(self) -> int:
        return len(self.edges)

    def block_sums(self) -> np.ndarray:
        """Sum of the four entries of each block."""
        return self.blocks.sum(axis=(1, 2))

    def to_sparse(self) -> sparse.csr_matrix:
        """Symmetric 2n x 2n matrix in canonical CSR format."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        label_i, label_j = np.meshgrid([0, 1], [0, 1], indexing="ij")
        rows = (2 * i[:, None, None] + label_i).ravel()
        cols = (2 * j[:, None, None] + label_j).ravel()
        values = self.blocks.ravel()
        matrix = sparse.coo_matrix(
            (
                np.concatenate([values, values]),
                (np.concatenate([rows, cols]), np.concatenate([cols, rows])),
            ),
            shape=(2 * self.n, 2 * self.n),
        ).tocsr()
        matrix.sum_duplicates()
        matrix.sort_indices()
        return matrix

    def reweighted(self, marginals: np.ndarray) -> "PairProbMatrix":
        """
        Reweight blocks by marginal label probabilities.

        ``p(s_i = a, s_j = b) <- p(s_i = a, s_j = b) * p_m(s_i = a) * p_m(s_j = b)``,
        renormalized per block. Blocks that vanish entirely keep their original entries.

        Args:
            marginals: Marginal probabilities ``[p(F), p(B)]`` of shape (n, 2)
        """
        m_i = marginals[self.edges[:, 0]]
        m_j = marginals[self.edges[:, 1]]
        weighted = self.blocks * m_i[:, :, None] * m_j[:, None, :]
        sums = weighted.sum(axis=(1, 2))
        valid = sums > 0
        blocks = self.blocks.copy()
        blocks[valid] = weighted[valid] / sums[valid, None, None]
        return PairProbMatrix(self.n, self.edges, blocks)


def assemble_assignment_matrix(
    pair: PairProbMatrix, unary: UnaryTable, lam: float
) -> sparse.csr_matrix:
    """
    Assemble the assignment matrix ``P + lam^2 * C``.

    C is diagonal with the squared unary probabilities ``p(F)^2`` at ``2 * i`` and ``p(B)^2``
    at ``2 * i + 1``.

    Args:
        pair: Pairwise probabilities
        unary: Unary probabilities
        lam: Weight of the unary term

    Returns:
        Symmetric nonnegative 2n x 2n matrix in canonical CSR format
    """
    if lam < 0:
        raise ValueError(f"Unary weight lambda must be >= 0, got {lam}")
    if len(unary) != pair.n:
        raise ValueError(f"Unary table has {len(unary)} rows, expected {pair.n}")
    matrix = pair.to_sparse()
    if lam > 0:
        matrix = (matrix + sparse.diags(lam**2 * unary.probabilities.ravel() ** 2)).tocsr()
        matrix.eliminate_zeros()
        matrix.sum_duplicates()
        matrix.sort_indices()
    return matrix


def dump_coordinates(matrix: sparse.spmatrix, path: str | Path):
    """
    Write a sparse matrix in coordinate text format.

    One ``row col value`` line per stored entry, sorted by (row, col).
    """
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as f:
        for row, col, value in zip(coo.row[order], coo.col[order], coo.data[order]):
            f.write(f"{row} {col} {float(value)!r}\n")
