from __future__ import annotations

import warnings

import numpy as np

from ..imagecore import BoundingBox, SegMask


class MetricWarning(Warning):
    """Warning raised if a metric is evaluated on degenerate input."""


def _check_shapes(mask: SegMask, groundtruth: SegMask):
    if mask.shape != groundtruth.shape:
        raise ValueError(f"Mask shape {mask.shape} does not match ground truth {groundtruth.shape}")


def bbox_error(mask: SegMask, groundtruth: SegMask, bbox: BoundingBox) -> float:
    """
    Fraction of misclassified pixels inside the bounding box.

    Raises:
        ValueError: If dimensions differ or the bounding box is empty or exceeds the image
    """
    _check_shapes(mask, groundtruth)
    bbox.check_within(mask.shape)
    region = bbox.slices()
    wrong = np.count_nonzero(mask.foreground[region] != groundtruth.foreground[region])
    return wrong / bbox.area


def overlap_score(mask: SegMask, groundtruth: SegMask) -> float:
    """
    Overlap score (intersection over union) of the foregrounds.

    Two empty foregrounds agree perfectly (1.0), a `MetricWarning` is issued.

    Raises:
        ValueError: If dimensions differ
    """
    _check_shapes(mask, groundtruth)
    union = np.count_nonzero(mask.foreground | groundtruth.foreground)
    if union == 0:
        warnings.warn("Overlap score of two empty foregrounds", MetricWarning, stacklevel=2)
        return 1.0
    return np.count_nonzero(mask.foreground & groundtruth.foreground) / union
