from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..colormodel import GmmModel, fit_gmm, kl_gaussians_to_gmm
from ..imagecore import LabImage, Provenance, SegMask, TriMap, TrimapLabel, ring_mask, write_mask
from ..inference import MarginalTable, ml_labels, pgm_marginals, sgm_marginals
from ..probability import (
    Bandwidths,
    UnaryTable,
    assemble_assignment_matrix,
    cross_class_divergences,
    dump_coordinates,
    estimate_sigma_p,
    estimate_sigma_u_initial,
    mean_bandwidth,
    median_bandwidth,
    pairwise_probabilities,
    unary_background_from_divergences,
    unary_probabilities,
)
from ..superpixel import save_label_map
from .config import Mode, SegConfig, Solver, check_mode
from .scene import SuperpixelScene, prepare_scene

logger = logging.getLogger(__name__)


class SegmentationWarning(Warning):
    """Warning raised for degenerate segmentations, e.g. all superpixels in one class."""


@dataclass
class IterationState:
    """Labels, class models and bandwidths after a refinement iteration."""

    t: int  #: Iteration index, 0 after initialization
    #: Label per superpixel, True = foreground (F_t), False = background (B_t)
    foreground: np.ndarray
    gmm_f: GmmModel | None  #: Foreground model (None in background-only mode)
    gmm_b: GmmModel  #: Background model
    bandwidths: Bandwidths  #: Current bandwidths
    marginals: MarginalTable | None = None  #: Marginals of iteration t

    @property
    def foreground_ids(self) -> np.ndarray:
        return np.flatnonzero(self.foreground)

    @property
    def background_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.foreground)


@dataclass(frozen=True)
class IterationRecord:
    """Progress of a refinement iteration."""

    t: int  #: Iteration index (starting at 1)
    n_foreground: int  #: Number of foreground superpixels
    n_background: int  #: Number of background superpixels
    changes: int  #: Number of superpixels that changed their label
    bandwidths: Bandwidths  #: Bandwidths used in the iteration


@dataclass
class SegmentationResult:
    """Result of a single segmentation run."""

    mask: SegMask  #: Per-pixel segmentation
    labels: np.ndarray = field(repr=False)  #: Label per superpixel, True = foreground
    marginals: MarginalTable | None = field(repr=False)  #: Marginals of the last iteration
    history: list[IterationRecord] = field(default_factory=list, repr=False)
    collapsed: bool = False  #: All superpixels were assigned to the background
    n_superpixels: int = 0  #: Number of superpixels

    @property
    def iterations(self) -> int:
        """Number of refinement iterations run."""
        return len(self.history)


def _fit_class_gmm(image: LabImage, pixel_mask: np.ndarray, k: int, seed: int) -> GmmModel:
    samples = image.pixels()[pixel_mask]
    return fit_gmm(samples, max(1, min(k, len(samples) // 3)), seed)


def _background_training_pixels(
    scene: SuperpixelScene, trimap: TriMap, config: SegConfig, min_pixels: int
) -> np.ndarray:
    """Flat pixel mask of the background model training set."""
    background_pixels = scene.pixel_mask(scene.background)
    ring = None
    if trimap.provenance == Provenance.BBOX and trimap.bbox is not None:
        ring = ring_mask(trimap.bbox.mask(trimap.shape), config.ring_width)
    elif config.prior_ring is not None:
        ring = ring_mask(~trimap.region(TrimapLabel.BACKGROUND), config.prior_ring)
    if ring is None:
        return background_pixels
    ring_pixels = background_pixels & ring.ravel()
    if np.count_nonzero(ring_pixels) < min_pixels:
        logger.debug("Background ring too small, training on the whole background")
        return background_pixels
    return ring_pixels


def init_models(
    image: LabImage, scene: SuperpixelScene, trimap: TriMap, config: SegConfig, seed: int
) -> IterationState:
    """
    Initial class models and bandwidths from the trimap.

    The background model is trained on the background superpixels, restricted to a ring around
    the bounding box (bounding box trimaps) or around the unknown region (prior maps with
    `SegConfig.prior_ring`).
    The foreground model is trained on the foreground superpixels of the trimap if there are
    any, otherwise on the unknown superpixels.
    In background-only mode no foreground model is trained.

    Args:
        image: Input image
        scene: Superpixels of the run
        trimap: Trimap
        config: Segmentation parameters
        seed: Seed of the GMM initialization

    Returns:
        State of iteration 0, all superpixels outside the background labeled foreground

    Raises:
        ValueError: If the trimap has no background or no unknown superpixels, or its
            source does not fit `SegConfig.mode` (`check_mode`)
    """
    check_mode(config, trimap)
    background = scene.background
    foreground = scene.state_mask(TrimapLabel.FOREGROUND)
    candidates = ~background
    if not np.any(background) or not np.any(candidates):
        raise ValueError(
            "Degenerate trimap: superpixels with background and unknown state required, "
            f"got {np.count_nonzero(background)} background of {scene.n} superpixels"
        )

    background_pixels = _background_training_pixels(scene, trimap, config, 3 * config.k_b)
    gmm_b = _fit_class_gmm(image, background_pixels, config.k_b, seed)

    if config.mode == Mode.GB:
        gmm_f = None
        d_b = kl_gaussians_to_gmm(scene.mu, scene.sigma, gmm_b)
        sigma_u = median_bandwidth(d_b[background])
    else:
        training = foreground if np.any(foreground) else candidates
        gmm_f = _fit_class_gmm(image, scene.pixel_mask(training), config.k_f, seed)
        sigma_u = estimate_sigma_u_initial(scene.mu[training], scene.sigma[training], gmm_f)

    sigma_p = estimate_sigma_p(scene.edges.distances)
    return IterationState(
        t=0,
        foreground=candidates,
        gmm_f=gmm_f,
        gmm_b=gmm_b,
        bandwidths=Bandwidths.initial(sigma_u, sigma_p),
    )


def refine_bandwidths(state: IterationState, scene: SuperpixelScene) -> Bandwidths:
    """
    Refine the bandwidths from the current labels and class models.

    - unary: average divergence of the superpixels of each class to the class model
    - pairwise: average symmetric divergence of the selected pairs within each class,
      median symmetric divergence between all foreground and all background superpixels

    Bandwidths of empty sets keep their previous value.
    """
    previous = state.bandwidths
    changes = {}
    foreground, background = state.foreground, ~state.foreground
    if state.gmm_f is not None and np.any(foreground):
        changes["sigma_u_f"] = mean_bandwidth(
            kl_gaussians_to_gmm(scene.mu[foreground], scene.sigma[foreground], state.gmm_f)
        )
    if np.any(background):
        changes["sigma_u_b"] = mean_bandwidth(
            kl_gaussians_to_gmm(scene.mu[background], scene.sigma[background], state.gmm_b)
        )

    label_i = foreground[scene.edges.edges[:, 0]]
    label_j = foreground[scene.edges.edges[:, 1]]
    distances = scene.edges.distances
    both_f = label_i & label_j
    both_b = ~label_i & ~label_j
    if np.any(both_f):
        changes["sigma_p_f"] = mean_bandwidth(distances[both_f])
    if np.any(both_b):
        changes["sigma_p_b"] = mean_bandwidth(distances[both_b])
    cross = cross_class_divergences(scene.mu, scene.sigma, foreground)
    if len(cross):
        changes["sigma_p_bf"] = median_bandwidth(cross)

    result = previous.replace(**changes)
    logger.debug("Refined bandwidths: %s", result)
    return result


def _unary_table(scene: SuperpixelScene, state: IterationState, config: SegConfig) -> UnaryTable:
    bandwidths = state.bandwidths
    if config.mode == Mode.GB or state.gmm_f is None:
        d_b = kl_gaussians_to_gmm(scene.mu, scene.sigma, state.gmm_b)
        return unary_background_from_divergences(d_b, bandwidths.sigma_u_b, scene.background)
    return unary_probabilities(
        scene.mu,
        scene.sigma,
        state.gmm_f,
        state.gmm_b,
        bandwidths.sigma_u_f,
        bandwidths.sigma_u_b,
        scene.background,
    )


def _refit_models(
    image: LabImage,
    scene: SuperpixelScene,
    state: IterationState,
    labels: np.ndarray,
    config: SegConfig,
    seed: int,
) -> tuple[GmmModel | None, GmmModel]:
    def refit(selected: np.ndarray, k: int, previous: GmmModel | None) -> GmmModel | None:
        pixels = scene.pixel_mask(selected)
        if np.count_nonzero(pixels) < 3:
            return previous
        return _fit_class_gmm(image, pixels, k, seed)

    gmm_f = None if state.gmm_f is None else refit(labels, config.k_f, state.gmm_f)
    gmm_b = refit(~labels, config.k_b, state.gmm_b)
    assert gmm_b is not None
    return gmm_f, gmm_b


def run_segmentation(
    image: LabImage,
    trimap: TriMap,
    config: SegConfig,
    seed: int | None = None,
    *,
    debug_dir: str | Path | None = None,
) -> SegmentationResult:
    """
    Segment an image into foreground and background.

    Steps:

    1. Watershed over-segmentation and superpixel Gaussians (`prepare_scene`)
    2. Initial class models and bandwidths from the trimap (`init_models`)
    3. Up to `SegConfig.refine_iters` iterations of:
       unary and pairwise probabilities, inference (SGM or PGM), maximum likelihood labels
       with background trimap superpixels clamped to the background, refit of the class
       models and refinement of the bandwidths.
       The loop stops early if the labels did not change or repeat the labels of an earlier
       iteration (all later iterations would repeat as well).

    Args:
        image: Input image
        trimap: Trimap of the same dimensions
        config: Segmentation parameters
        seed: Seed of the run, default: `SegConfig.seed`
        debug_dir: Directory to write superpixels, assignment matrices and masks per iteration

    Returns:
        Segmentation result, `collapsed` is set (and a `SegmentationWarning` issued) if all
        superpixels were assigned to the background
    """
    check_mode(config, trimap)
    seed = config.seed if seed is None else seed
    scene = prepare_scene(image, trimap, config, seed)
    state = init_models(image, scene, trimap, config, seed)
    if debug_dir is not None:
        debug_dir = Path(debug_dir)
        debug_dir.mkdir(parents=True, exist_ok=True)
        save_label_map(scene.superpixels, scene.shape, debug_dir / "superpixels.png", seed)

    background = scene.background
    history: list[IterationRecord] = []
    collapsed = False
    # labeling -> first iteration it occurred in
    seen: dict[bytes, int] = {}
    for t in range(1, config.refine_iters + 1):
        unary = _unary_table(scene, state, config)
        pair = pairwise_probabilities(scene.n, scene.edges, state.bandwidths, refined=t > 1)
        if config.solver == Solver.PGM:
            marginals = pgm_marginals(pair, unary, config.lam, config.pgm_rounds, config.pgm_tol)
        else:
            marginals = sgm_marginals(assemble_assignment_matrix(pair, unary, config.lam))
        labels = ml_labels(marginals) & ~background

        changes = int(np.count_nonzero(labels != state.foreground))
        n_foreground = int(np.count_nonzero(labels))
        logger.info(
            "iteration %d: %d F / %d B superpixels, %d label changes",
            t,
            n_foreground,
            scene.n - n_foreground,
            changes,
        )
        history.append(
            IterationRecord(t, n_foreground, scene.n - n_foreground, changes, state.bandwidths)
        )
        if debug_dir is not None:
            matrix = assemble_assignment_matrix(pair, unary, config.lam)
            dump_coordinates(matrix, debug_dir / f"matrix_{t:02d}.txt")
            write_mask(scene.to_mask(labels), debug_dir / f"mask_{t:02d}.png")

        converged = t > 1 and changes == 0
        key = labels.tobytes()
        cycle_start = seen.get(key)
        if not converged and cycle_start is not None:
            logger.info("iteration %d: labels of iteration %d repeat, stopping", t, cycle_start)
        seen.setdefault(key, t)
        if n_foreground == 0:
            collapsed = True
            warnings.warn(
                f"All {scene.n} superpixels were assigned to the background in iteration {t}",
                SegmentationWarning,
                stacklevel=2,
            )
        if collapsed or converged or cycle_start is not None:
            state = IterationState(t, labels, state.gmm_f, state.gmm_b, state.bandwidths, marginals)
            break

        gmm_f, gmm_b = _refit_models(image, scene, state, labels, config, seed)
        state = IterationState(t, labels, gmm_f, gmm_b, state.bandwidths, marginals)
        state.bandwidths = refine_bandwidths(state, scene)

    return SegmentationResult(
        mask=scene.to_mask(state.foreground),
        labels=state.foreground,
        marginals=state.marginals,
        history=history,
        collapsed=collapsed,
        n_superpixels=scene.n,
    )
