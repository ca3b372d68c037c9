from __future__ import annotations

import logging

import numpy as np
from scipy.special import logsumexp, softmax

from .._numba import USE_NUMBA, njit
from ..probability import PairProbMatrix, UnaryTable, assemble_assignment_matrix
from .spectral import MarginalTable, sgm_marginals

logger = logging.getLogger(__name__)

#: Maximum number of superpixels for exhaustive labeling
MAX_EXHAUSTIVE_SUPERPIXELS = 16

#: Maximum number of ICM sweeps per candidate labeling
MAX_ICM_SWEEPS = 100


def _safe_log(values: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(values, np.finfo(np.float64).tiny))


def _incidence(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node lists of incident edges in CSR layout: pointers, edge ids, endpoint side."""
    nodes = edges.T.ravel()
    edge_ids = np.tile(np.arange(len(edges), dtype=np.int64), 2)
    sides = np.repeat(np.arange(2, dtype=np.int64), len(edges))
    order = np.argsort(nodes, kind="stable")
    pointers = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(nodes, minlength=n), out=pointers[1:])
    return pointers, edge_ids[order], sides[order]


def _local_scores(
    index: np.ndarray,
    edges: np.ndarray,
    log_unary: np.ndarray,
    log_blocks: np.ndarray,
) -> np.ndarray:
    """Log score of each label of each node given the labels of its neighbors, shape (n, 2)."""
    scores = log_unary.copy()
    i, j = edges[:, 0], edges[:, 1]
    np.add.at(scores, i, log_blocks[np.arange(len(edges)), :, index[j]])
    np.add.at(scores, j, log_blocks[np.arange(len(edges)), index[i], :])
    return scores


def _icm_numpy(
    index: np.ndarray,
    edges: np.ndarray,
    log_unary: np.ndarray,
    log_blocks: np.ndarray,
    pointers: np.ndarray,
    edge_ids: np.ndarray,
    sides: np.ndarray,
    max_sweeps: int,
) -> np.ndarray:
    index = index.copy()
    for _ in range(max_sweeps):
        changed = False
        for node in range(len(index)):
            incident = edge_ids[pointers[node] : pointers[node + 1]]
            side = sides[pointers[node] : pointers[node + 1]]
            other = np.where(side == 0, edges[incident, 1], edges[incident, 0])
            blocks = log_blocks[incident]
            # rows of the block select this node's label when it is the first endpoint
            contributions = np.where(
                side[:, None] == 0,
                blocks[np.arange(len(incident)), :, index[other]],
                blocks[np.arange(len(incident)), index[other], :],
            )
            score = log_unary[node] + contributions.sum(axis=0)
            label = 0 if score[0] > score[1] else 1
            if label != index[node]:
                index[node] = label
                changed = True
        if not changed:
            break
    return index


@njit
def _icm_numba(
    index: np.ndarray,
    edges: np.ndarray,
    log_unary: np.ndarray,
    log_blocks: np.ndarray,
    pointers: np.ndarray,
    edge_ids: np.ndarray,
    sides: np.ndarray,
    max_sweeps: int,
) -> np.ndarray:
    index = index.copy()
    for _ in range(max_sweeps):
        changed = False
        for node in range(len(index)):
            score_f = log_unary[node, 0]
            score_b = log_unary[node, 1]
            for position in range(pointers[node], pointers[node + 1]):
                edge = edge_ids[position]
                if sides[position] == 0:
                    other = index[edges[edge, 1]]
                    score_f += log_blocks[edge, 0, other]
                    score_b += log_blocks[edge, 1, other]
                else:
                    other = index[edges[edge, 0]]
                    score_f += log_blocks[edge, other, 0]
                    score_b += log_blocks[edge, other, 1]
            label = 0 if score_f > score_b else 1
            if label != index[node]:
                index[node] = label
                changed = True
        if not changed:
            break
    return index


def icm_labels(
    pair: PairProbMatrix,
    unary: UnaryTable,
    labels: np.ndarray,
    max_sweeps: int = MAX_ICM_SWEEPS,
) -> np.ndarray:
    """
    Improve a labeling by iterated conditional modes.

    Superpixels are visited in id order and set to the label with the higher log score given
    the current labels of their neighbors (ties are background). Sweeps repeat until no label
    changes or `max_sweeps` is reached. The log score of the labeling never decreases.

    Args:
        pair: Pairwise probabilities
        unary: Unary probabilities
        labels: Boolean start labels, True = foreground
        max_sweeps: Maximum number of sweeps

    Returns:
        Boolean labels, True = foreground
    """
    index = (~np.asarray(labels, dtype=bool)).astype(np.int64)
    if len(index) != pair.n:
        raise ValueError(f"Expected {pair.n} labels, got {len(index)}")
    with np.errstate(divide="ignore"):
        log_unary = np.log(unary.probabilities)
        log_blocks = np.log(pair.blocks)
    edges = np.ascontiguousarray(pair.edges, dtype=np.int64)
    pointers, edge_ids, sides = _incidence(pair.n, edges)
    kernel = _icm_numba if USE_NUMBA else _icm_numpy
    index = kernel(index, edges, log_unary, log_blocks, pointers, edge_ids, sides, max_sweeps)
    return index == 0


def _max_product_refinement(
    pair: PairProbMatrix, unary: UnaryTable, marginals: np.ndarray
) -> np.ndarray:
    """
    Refine spectral marginals by one max-product exchange on the pairwise graph.

    Each superpixel sends its neighbors the best-case support of its labels: first computed
    from its spectral marginals, then from its unary term and the messages of all other
    neighbors (cavity). Returns the normalized product of unary terms and cavity messages.
    """
    log_unary = _safe_log(unary.probabilities)
    if len(pair) == 0:
        return softmax(log_unary, axis=1)
    log_blocks = _safe_log(pair.blocks)
    log_marginals = _safe_log(marginals)
    i, j = pair.edges[:, 0], pair.edges[:, 1]
    # messages based on the spectral marginals of the sender
    to_i = np.max(log_blocks + log_marginals[j][:, None, :], axis=2)
    to_j = np.max(log_blocks + log_marginals[i][:, :, None], axis=1)
    beliefs = log_unary.copy()
    np.add.at(beliefs, i, to_i)
    np.add.at(beliefs, j, to_j)
    cavity_i = beliefs[i] - to_i
    cavity_j = beliefs[j] - to_j
    from_i = np.max(log_blocks + cavity_i[:, :, None], axis=1)
    from_j = np.max(log_blocks + cavity_j[:, None, :], axis=2)
    from_i -= logsumexp(from_i, axis=1, keepdims=True)
    from_j -= logsumexp(from_j, axis=1, keepdims=True)
    refined = log_unary.copy()
    np.add.at(refined, j, from_i)
    np.add.at(refined, i, from_j)
    return softmax(refined, axis=1)


def conditional_marginals(
    pair: PairProbMatrix, unary: UnaryTable, labels: np.ndarray
) -> MarginalTable:
    """
    Label probabilities of each superpixel given the labels of all others.

    ``q_i(a) ∝ u_i(a) * prod_j p_ij(a, l_j)`` over the neighbors j of superpixel i.
    Superpixels where both labels have zero probability get ``[0.5, 0.5]``.
    """
    index = (~np.asarray(labels, dtype=bool)).astype(np.int64)
    with np.errstate(divide="ignore"):
        scores = _local_scores(index, pair.edges, np.log(unary.probabilities), np.log(pair.blocks))
    probabilities = np.full(scores.shape, 0.5)
    valid = np.isfinite(scores).any(axis=1)
    probabilities[valid] = softmax(scores[valid], axis=1)
    return MarginalTable(probabilities)


def pgm_marginals(
    pair: PairProbMatrix,
    unary: UnaryTable,
    lam: float,
    max_rounds: int = 10,
    tol: float = 1e-4,
) -> MarginalTable:
    """
    Marginal label probabilities by probabilistic graph matching.

    Each round computes spectral marginals of the current assignment matrix, refines them by
    a max-product exchange with the original pairwise probabilities and reweights the original
    pairwise probabilities by the refined marginals (`PairProbMatrix.reweighted`), so pairwise
    entries of unlikely labels fade out.
    Rounds stop when the spectral marginals change less than `tol` (max-norm) or after
    `max_rounds`.

    The labelings of all rounds (spectral and refined), the unary labeling and the final
    spectral labeling are improved by `icm_labels` and scored with `labeling_log_score`.
    The result holds the conditional marginals (`conditional_marginals`) at the best labeling,
    so `ml_labels` of the result returns that labeling.

    Args:
        pair: Original pairwise probabilities
        unary: Unary probabilities
        lam: Weight of the unary term
        max_rounds: Maximum number of rounds. Default: 10
        tol: Convergence threshold of the marginals. Default: 1e-4

    Returns:
        Marginal table
    """
    if max_rounds < 1:
        raise ValueError(f"Number of rounds must be >= 1, got {max_rounds}")
    candidates = [unary.foreground > unary.background]
    current = pair
    previous: MarginalTable | None = None
    for round_index in range(1, max_rounds + 1):
        marginals = sgm_marginals(assemble_assignment_matrix(current, unary, lam))
        if previous is not None:
            change = float(np.max(np.abs(marginals.probabilities - previous.probabilities)))
            logger.debug("PGM round %d: marginal change %g", round_index, change)
            if change < tol:
                break
        previous = marginals
        refined = _max_product_refinement(pair, unary, marginals.probabilities)
        candidates.append(marginals.foreground > marginals.background)
        candidates.append(refined[:, 0] > refined[:, 1])
        current = pair.reweighted(refined)
    candidates.append(marginals.foreground > marginals.background)

    polished = np.stack([icm_labels(pair, unary, labels) for labels in _unique(candidates)])
    scores = _log_scores(pair, unary, polished)
    best = int(np.argmax(scores))
    logger.debug("PGM candidate scores: %s, best %d", np.array2string(scores, precision=4), best)
    return conditional_marginals(pair, unary, polished[best])


def _unique(candidates: list[np.ndarray]) -> list[np.ndarray]:
    seen: set[bytes] = set()
    result = []
    for labels in candidates:
        key = labels.tobytes()
        if key not in seen:
            seen.add(key)
            result.append(labels)
    return result


def labeling_log_score(pair: PairProbMatrix, unary: UnaryTable, labels: np.ndarray) -> float:
    """
    Log of the product of the selected pairwise block entries and unary terms of a labeling.

    Args:
        pair: Pairwise probabilities
        unary: Unary probabilities
        labels: Boolean labels, True = foreground
    """
    return float(_log_scores(pair, unary, np.asarray(labels, dtype=bool)[None, :])[0])


def _log_scores(pair: PairProbMatrix, unary: UnaryTable, labels: np.ndarray) -> np.ndarray:
    # label index 0 = foreground, 1 = background
    index = (~labels).astype(np.int64)
    with np.errstate(divide="ignore"):
        log_unary = np.log(unary.probabilities)
        log_blocks = np.log(pair.blocks)
    n = pair.n
    score = log_unary[np.arange(n)[None, :], index].sum(axis=1)
    if len(pair):
        i, j = pair.edges[:, 0], pair.edges[:, 1]
        score += log_blocks[np.arange(len(pair))[None, :], index[:, i], index[:, j]].sum(axis=1)
    return score


def map_labels_exhaustive(pair: PairProbMatrix, unary: UnaryTable) -> np.ndarray:
    """
    Most probable labeling by exhaustive enumeration of all labelings.

    Each labeling is scored by the product of its pairwise block entries and unary terms.
    Ties are resolved in favor of the labeling enumerated first (all foreground first).

    Args:
        pair: Pairwise probabilities
        unary: Unary probabilities

    Returns:
        Boolean labels, True = foreground

    Raises:
        ValueError: If there are more than `MAX_EXHAUSTIVE_SUPERPIXELS` superpixels
    """
    n = pair.n
    if n > MAX_EXHAUSTIVE_SUPERPIXELS:
        raise ValueError(
            f"Exhaustive labeling is limited to {MAX_EXHAUSTIVE_SUPERPIXELS} superpixels, got {n}"
        )
    codes = np.arange(2**n)
    # bit set = background
    labels = ((codes[:, None] >> np.arange(n)[None, :]) & 1) == 0
    scores = _log_scores(pair, unary, labels)
    return labels[int(np.argmax(scores))]
