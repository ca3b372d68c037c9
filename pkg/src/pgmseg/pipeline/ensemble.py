from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from ..imagecore import LabImage, SegMask, TriMap
from .config import SegConfig
from .refinement import SegmentationResult, run_segmentation

logger = logging.getLogger(__name__)


@dataclass
class EnsembleResult:
    """Majority vote of several segmentation runs."""

    mask: SegMask  #: Fused segmentation
    runs: list[SegmentationResult] = field(repr=False)  #: Individual runs in run order

    @property
    def collapsed_runs(self) -> int:
        """Number of runs that collapsed to the background."""
        return sum(run.collapsed for run in self.runs)


def majority_vote(masks: Sequence[SegMask]) -> SegMask:
    """
    Per-pixel majority vote of segmentations.

    A pixel is foreground if more than half of the masks label it foreground, ties are
    background.

    Raises:
        ValueError: If no masks are given or their dimensions differ
    """
    if len(masks) == 0:
        raise ValueError("Majority vote requires at least one mask")
    shape = masks[0].shape
    for mask in masks:
        if mask.shape != shape:
            raise ValueError(f"Mask dimensions differ: {mask.shape} != {shape}")
    votes = np.sum([mask.foreground for mask in masks], axis=0, dtype=np.int64)
    return SegMask(2 * votes > len(masks))


def _run_single(
    image: LabImage, trimap: TriMap, config: SegConfig, seed: int, debug_dir: Path | None
) -> SegmentationResult:
    return run_segmentation(image, trimap, config, seed, debug_dir=debug_dir)


def run_ensemble(
    image: LabImage,
    trimap: TriMap,
    config: SegConfig,
    max_workers: int = 1,
    show_progress: bool = False,
    debug_dir: str | Path | None = None,
) -> EnsembleResult:
    """
    Segment an image `SegConfig.runs` times and fuse the masks by majority voting.

    Run r uses the seed ``SegConfig.seed + r``, runs only differ in the watershed markers and
    the GMM initialization.

    Args:
        image: Input image
        trimap: Trimap of the same dimensions
        config: Segmentation parameters
        max_workers: Number of worker processes, 1 runs sequentially in this process
        show_progress: Show progress bar
        debug_dir: Directory for debug output, one subdirectory ``run_<r>`` per run

    Returns:
        Fused mask and all runs in run order
    """
    seeds = [config.seed + run for run in range(config.runs)]
    debug_dirs: list[Path | None] = [None] * config.runs
    if debug_dir is not None:
        debug_dirs = [Path(debug_dir) / f"run_{run:02d}" for run in range(config.runs)]
    if max_workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(max_workers, len(seeds))) as executor:
            futures = [
                executor.submit(_run_single, image, trimap, config, seed, path)
                for seed, path in zip(seeds, debug_dirs)
            ]
            iterator = tqdm(futures, desc="Runs") if show_progress else futures
            results = [future.result() for future in iterator]
    else:
        jobs = list(zip(seeds, debug_dirs))
        iterator = tqdm(jobs, desc="Runs") if show_progress else jobs
        results = [_run_single(image, trimap, config, seed, path) for seed, path in iterator]

    ensemble = EnsembleResult(majority_vote([result.mask for result in results]), results)
    logger.debug("Ensemble of %d runs, %d collapsed", len(results), ensemble.collapsed_runs)
    return ensemble
