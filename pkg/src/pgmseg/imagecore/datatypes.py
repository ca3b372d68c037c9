from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np


class TrimapLabel(IntEnum):
    """Per-pixel trimap labels, valued as in 8-bit trimap files."""

    # fmt: off
    BACKGROUND = 0    #: Known background (hard constraint)
    UNKNOWN    = 128  #: Unknown, to be segmented
    FOREGROUND = 255  #: Known foreground
    # fmt: on


class Provenance(str, Enum):
    """Source a `TriMap` was built from."""

    BBOX = "bbox"
    TRIMAP_FILE = "trimap-file"
    PRIOR_MAP = "prior-map"


@dataclass(frozen=True)
class LabImage:
    """Image in CIELAB color space."""

    lab: np.ndarray  #: Array of shape (height, width, 3), L in [0, 100]

    def __post_init__(self):
        if self.lab.ndim != 3 or self.lab.shape[2] != 3:
            raise ValueError(f"LAB image must have shape (height, width, 3), got {self.lab.shape}")
        if self.lab.shape[0] * self.lab.shape[1] == 0:
            raise ValueError("LAB image must not be empty")

    @property
    def height(self) -> int:
        return self.lab.shape[0]

    @property
    def width(self) -> int:
        return self.lab.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        """Image dimensions (height, width)."""
        return self.lab.shape[0], self.lab.shape[1]

    def pixels(self) -> np.ndarray:
        """LAB triplets in raster order, shape (height * width, 3)."""
        return self.lab.reshape(-1, 3)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, 0-indexed and half-open: columns [x, x + w), rows [y, y + h)."""

    x: int
    y: int
    w: int
    h: int

    @classmethod
    def from_string(cls, text: str) -> "BoundingBox":
        """
        Parse a bounding box from four whitespace separated integers ``"x y w h"``.

        Raises:
            ValueError: If the text does not contain exactly four integers
        """
        parts = text.split()
        if len(parts) != 4:
            raise ValueError(f"Bounding box requires four integers 'x y w h', got '{text}'")
        try:
            x, y, w, h = (int(part) for part in parts)
        except ValueError:
            raise ValueError(f"Bounding box values must be integers, got '{text}'") from None
        return cls(x, y, w, h)

    @classmethod
    def read(cls, path: str | Path) -> "BoundingBox":
        """Read bounding box file (one line ``x y w h``)."""
        return cls.from_string(Path(path).read_text("utf-8").strip())

    def __str__(self) -> str:
        return f"{self.x} {self.y} {self.w} {self.h}"

    @property
    def area(self) -> int:
        return self.w * self.h

    def check_within(self, shape: tuple[int, int]):
        """
        Check that the box is nonempty and lies within an image of given (height, width).

        Raises:
            ValueError: If the box is empty or exceeds the image bounds
        """
        height, width = shape
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Bounding box {self} is empty")
        if self.x < 0 or self.y < 0 or self.x + self.w > width or self.y + self.h > height:
            raise ValueError(f"Bounding box {self} exceeds image of size {width}x{height}")

    def slices(self) -> tuple[slice, slice]:
        """Row and column slices to index an image array."""
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean mask of the pixels inside the box."""
        result = np.zeros(shape, dtype=bool)
        result[self.slices()] = True
        return result


@dataclass(frozen=True)
class TriMap:
    """Per-pixel partition into known background, unknown and known foreground."""

    labels: np.ndarray  #: uint8 array of `TrimapLabel` values, shape (height, width)
    provenance: Provenance  #: How the trimap was built
    bbox: BoundingBox | None = None  #: Bounding box in bbox mode

    def __post_init__(self):
        valid = np.isin(self.labels, [label.value for label in TrimapLabel])
        if not np.all(valid):
            raise ValueError(
                f"Trimap contains invalid values {np.unique(self.labels[~valid])}, "
                "use 0 (background), 128 (unknown) or 255 (foreground)"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape[0], self.labels.shape[1]

    def region(self, label: TrimapLabel) -> np.ndarray:
        """Boolean mask of pixels with the given label."""
        return self.labels == label

    def counts(self) -> dict[TrimapLabel, int]:
        """Number of pixels per label."""
        return {label: int(np.count_nonzero(self.labels == label)) for label in TrimapLabel}


@dataclass(frozen=True)
class SegMask:
    """Binary foreground/background segmentation."""

    foreground: np.ndarray = field(repr=False)  #: Boolean array, True = foreground

    def __post_init__(self):
        if self.foreground.dtype != bool:
            raise ValueError(f"Mask must be boolean, got dtype {self.foreground.dtype}")
        if self.foreground.ndim != 2:
            raise ValueError(f"Mask must be two-dimensional, got shape {self.foreground.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.foreground.shape[0], self.foreground.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.foreground, other.foreground))

    __hash__ = None  # type: ignore
