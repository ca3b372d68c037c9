from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..imagecore import (
    BoundingBox,
    LabImage,
    SegMask,
    TriMap,
    build_trimap,
    read_image,
    read_mask,
    read_prior,
    read_trimap,
    srgb_to_lab,
)
from ..pipeline import SegConfig, run_ensemble
from .manifest import EntryKind, ManifestEntry, Metric, read_manifest
from .metrics import bbox_error, overlap_score

logger = logging.getLogger(__name__)


@dataclass
class EvalRecord:
    """Evaluation result of a single image."""

    image_id: str  #: Image identifier (file stem)
    metric: str  #: Metric name, bbox_error or overlap
    value: float  #: Metric value in [0, 1], NaN if the entry failed
    config: dict[str, Any] = field(default_factory=dict, repr=False)  #: Configuration snapshot
    error: str | None = None  #: Error message if the entry failed

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class DatasetSummary:
    """Mean metric values of a dataset run."""

    means: dict[str, float]  #: Mean value per metric (successful entries only)
    n_records: int  #: Number of successful entries
    n_errors: int  #: Number of failed entries


def load_entry(entry: ManifestEntry, config: SegConfig) -> tuple[LabImage, TriMap, SegMask]:
    """
    Load image, trimap and ground truth of a manifest entry.

    Raises:
        OSError: If a file is missing or cannot be decoded
        ValueError: If the initialization is invalid
    """
    image = srgb_to_lab(read_image(entry.image))
    groundtruth = read_mask(entry.groundtruth)
    if groundtruth.shape != image.shape:
        raise ValueError(
            f"Ground truth shape {groundtruth.shape} does not match image shape {image.shape}"
        )
    if entry.kind == EntryKind.BBOX:
        path = Path(entry.init)
        bbox = BoundingBox.read(path) if path.is_file() else BoundingBox.from_string(entry.init)
        trimap = build_trimap(image.shape, bbox=bbox)
    elif entry.kind == EntryKind.TRIMAP:
        trimap = build_trimap(image.shape, trimap=read_trimap(entry.init))
    else:
        trimap = build_trimap(image.shape, prior=read_prior(entry.init), p0=config.p0)
    return image, trimap, groundtruth


def evaluate_entry(entry: ManifestEntry, config: SegConfig) -> EvalRecord:
    """
    Segment a manifest entry (majority vote of `SegConfig.runs` runs) and compute its metric.

    Failures are returned as records with an error message instead of raising.
    """
    try:
        image, trimap, groundtruth = load_entry(entry, config)
        mask = run_ensemble(image, trimap, config).mask
        if entry.metric == Metric.BBOX_ERROR:
            if trimap.bbox is None:
                raise ValueError("Metric bbox_error requires a bounding box entry")
            value = bbox_error(mask, groundtruth, trimap.bbox)
        else:
            value = overlap_score(mask, groundtruth)
    except (OSError, ValueError) as e:
        logger.warning("Entry %s failed: %s", entry.image_id, e)
        return EvalRecord(entry.image_id, entry.metric.value, math.nan, config.to_dict(), str(e))
    logger.info("Entry %s: %s = %.4f", entry.image_id, entry.metric.value, value)
    return EvalRecord(entry.image_id, entry.metric.value, float(value), config.to_dict())


def summarize(records: Sequence[EvalRecord]) -> DatasetSummary:
    """Mean value per metric of the successful records."""
    values: dict[str, list[float]] = {}
    for record in records:
        if not record.failed:
            values.setdefault(record.metric, []).append(record.value)
    return DatasetSummary(
        means={metric: float(np.mean(v)) for metric, v in values.items()},
        n_records=sum(len(v) for v in values.values()),
        n_errors=sum(record.failed for record in records),
    )


def run_dataset(
    manifest_path: str | Path,
    config: SegConfig,
    max_workers: int = 1,
    show_progress: bool = True,
) -> tuple[list[EvalRecord], DatasetSummary]:
    """
    Segment and evaluate all images of a manifest.

    Args:
        manifest_path: Manifest file, see `read_manifest`
        config: Segmentation parameters
        max_workers: Number of worker processes for the entries
        show_progress: Show progress bar

    Returns:
        - Records in manifest order (failed entries included)
        - Summary with the mean per metric

    Raises:
        ValueError: If the manifest is empty
    """
    entries = read_manifest(manifest_path)
    if not entries:
        raise ValueError(f"Manifest {manifest_path} contains no entries")

    if max_workers > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=min(max_workers, len(entries))) as executor:
            futures = [executor.submit(evaluate_entry, entry, config) for entry in entries]
            iterator = tqdm(futures, desc="Images") if show_progress else futures
            records = [future.result() for future in iterator]
    else:
        iterator = tqdm(entries, desc="Images") if show_progress else entries
        records = [evaluate_entry(entry, config) for entry in iterator]

    summary = summarize(records)
    logger.info("Dataset summary: %s (%d errors)", summary.means, summary.n_errors)
    return records, summary


def write_records(records: Sequence[EvalRecord], path: str | Path):
    """
    Write records as tab-separated lines ``image_id<TAB>metric<TAB>value``.

    Failed entries get a NaN value and the error message as fourth field.
    """
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            fields = [record.image_id, record.metric, f"{record.value:.6f}"]
            if record.failed:
                fields.append(f"error: {record.error}")
            f.write("\t".join(fields) + "\n")


def run_sweep(
    manifest_path: str | Path,
    config: SegConfig,
    parameter: str,
    values: Sequence[Any],
    max_workers: int = 1,
    show_progress: bool = True,
) -> pd.DataFrame:
    """
    Evaluate a dataset for several values of one parameter.

    Args:
        manifest_path: Manifest file
        config: Base configuration
        parameter: Name of a `SegConfig` field or ``k`` for both `k_f` and `k_b`
        values: Parameter values
        max_workers: Number of worker processes for the entries
        show_progress: Show progress bar

    Returns:
        DataFrame with the columns `parameter`, metric, mean, n and errors, one row per value
        and metric
    """
    rows = []
    for value in values:
        changes = {"k_f": value, "k_b": value} if parameter == "k" else {parameter: value}
        try:
            sweep_config = config.replace(**changes)
        except TypeError:
            raise ValueError(f"Unknown parameter '{parameter}'") from None
        logger.info("Sweep %s = %s", parameter, value)
        _, summary = run_dataset(manifest_path, sweep_config, max_workers, show_progress)
        for metric, mean in summary.means.items():
            rows.append(
                {
                    parameter: value,
                    "metric": metric,
                    "mean": mean,
                    "n": summary.n_records,
                    "errors": summary.n_errors,
                }
            )
    return pd.DataFrame(rows)
