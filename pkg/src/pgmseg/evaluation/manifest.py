from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)


class EntryKind(str, Enum):
    """Initialization of a dataset entry."""

    BBOX = "bbox"  #: Bounding box, ``x y w h`` or path to a file containing it
    TRIMAP = "trimap"  #: Path to an 8-bit trimap image
    PRIOR = "prior"  #: Path to a foreground probability map (``.npy`` or 8-bit image)


class Metric(str, Enum):
    """Evaluation metric."""

    BBOX_ERROR = "bbox_error"  #: Fraction of misclassified pixels inside the bounding box
    OVERLAP = "overlap"  #: Intersection over union of the foregrounds


@dataclass(frozen=True)
class ManifestEntry:
    """Single image of an evaluation dataset."""

    image: Path  #: Input image
    groundtruth: Path  #: Ground truth mask (foreground >= 128)
    kind: EntryKind  #: Initialization type
    init: str  #: Bounding box or path of the trimap / prior map
    metric: Metric  #: Metric to compute

    @property
    def image_id(self) -> str:
        return self.image.stem


def _default_metric(kind: EntryKind) -> Metric:
    return Metric.BBOX_ERROR if kind == EntryKind.BBOX else Metric.OVERLAP


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _is_bbox_string(value: str) -> bool:
    parts = value.split()
    return len(parts) == 4 and all(part.lstrip("-").isdigit() for part in parts)


def parse_manifest_line(line: str, base: Path) -> ManifestEntry:
    """
    Parse one manifest line ``image<TAB>groundtruth<TAB>kind<TAB>init[<TAB>metric]``.

    Relative paths are resolved against `base`.

    Raises:
        ValueError: If the line is malformed
    """
    fields = [field.strip() for field in line.rstrip("\r\n").split("\t")]
    if len(fields) not in (4, 5):
        raise ValueError(
            f"Manifest line requires 4 or 5 tab-separated fields, got {len(fields)}: '{line}'"
        )
    try:
        kind = EntryKind(fields[2])
    except ValueError:
        raise ValueError(
            f"Invalid entry kind '{fields[2]}', use one of {[k.value for k in EntryKind]}"
        ) from None
    try:
        metric = Metric(fields[4]) if len(fields) == 5 else _default_metric(kind)
    except ValueError:
        raise ValueError(
            f"Invalid metric '{fields[4]}', use one of {[m.value for m in Metric]}"
        ) from None

    init = fields[3]
    if not (kind == EntryKind.BBOX and _is_bbox_string(init)):
        init = str(_resolve(base, init))
    return ManifestEntry(
        image=_resolve(base, fields[0]),
        groundtruth=_resolve(base, fields[1]),
        kind=kind,
        init=init,
        metric=metric,
    )


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """
    Read dataset manifest.

    One entry per line with tab-separated fields:
    ``image``, ``groundtruth``, ``kind`` (bbox, trimap or prior), ``init`` and an optional
    ``metric`` (bbox_error or overlap, default: bbox_error for bbox entries, otherwise overlap).
    Paths are relative to the manifest directory. Empty lines and lines starting with ``#``
    are skipped.

    Args:
        path: Manifest file

    Returns:
        Entries in manifest order
    """
    path = Path(path)
    base = path.parent
    entries = []
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                entries.append(parse_manifest_line(line, base))
            except ValueError as e:
                raise ValueError(f"{path}:{number}: {e}") from None
    logger.debug("Read %d entries from manifest %s", len(entries), path)
    return entries


def write_manifest(entries: list[ManifestEntry], path: str | Path):
    """Write manifest file (paths as given)."""
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            fields = [str(entry.image), str(entry.groundtruth), entry.kind.value, entry.init]
            f.write("\t".join(fields + [entry.metric.value]) + "\n")
