"""Synthetic two-color test images with known ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage.color import lab2rgb

from ..imagecore import BoundingBox, LabImage, SegMask, write_mask
from .manifest import EntryKind, ManifestEntry, Metric, write_manifest

#: LAB color of the synthetic background (blue)
BACKGROUND_LAB = (45.0, 5.0, -45.0)
#: LAB color of the synthetic foreground (red)
FOREGROUND_LAB = (50.0, 60.0, 40.0)


@dataclass
class SyntheticImage:
    """Generated image with ground truth and bounding box."""

    image: LabImage = field(repr=False)
    groundtruth: SegMask = field(repr=False)
    bbox: BoundingBox  #: Rectangle enlarged by the margin

    def to_rgb(self) -> np.ndarray:
        """8-bit sRGB rendering of the image."""
        rgb = lab2rgb(self.image.lab, illuminant="D65", observer="2")
        return np.round(np.clip(rgb, 0, 1) * 255).astype(np.uint8)


def make_synthetic(
    rng: np.random.Generator,
    shape: tuple[int, int] = (80, 120),
    noise: float = 2.0,
    margin: int = 5,
) -> SyntheticImage:
    """
    Generate a red rectangle on a blue background with additive Gaussian noise.

    Args:
        rng: Random generator for the rectangle and the noise
        shape: Image dimensions (height, width)
        noise: Standard deviation of the noise in LAB units
        margin: The bounding box is the rectangle enlarged by `margin` pixels on each side

    Returns:
        Synthetic image with ground truth and bounding box
    """
    height, width = shape
    rect_h = int(rng.integers(int(0.3 * height), int(0.5 * height) + 1))
    rect_w = int(rng.integers(int(0.3 * width), int(0.5 * width) + 1))
    top = int(rng.integers(margin + 2, height - rect_h - margin - 2 + 1))
    left = int(rng.integers(margin + 2, width - rect_w - margin - 2 + 1))

    foreground = np.zeros(shape, dtype=bool)
    foreground[top : top + rect_h, left : left + rect_w] = True
    lab = np.where(foreground[..., None], FOREGROUND_LAB, BACKGROUND_LAB).astype(np.float64)
    lab += rng.normal(0, noise, size=lab.shape)
    lab[..., 0] = np.clip(lab[..., 0], 0, 100)

    bbox = BoundingBox(left - margin, top - margin, rect_w + 2 * margin, rect_h + 2 * margin)
    return SyntheticImage(LabImage(lab), SegMask(foreground), bbox)


def oracle_prior(groundtruth: SegMask, radius: int = 20) -> np.ndarray:
    """
    Foreground probability map from the ground truth dilated by `radius` pixels.

    Returns:
        Float map, 1 within the dilated foreground and 0 elsewhere
    """
    distance = ndimage.distance_transform_edt(~groundtruth.foreground)
    return (distance <= radius).astype(np.float64)


def write_synthetic_dataset(
    directory: str | Path,
    n: int,
    seed: int = 0,
    *,
    shape: tuple[int, int] = (80, 120),
    noise: float = 2.0,
    kind: EntryKind = EntryKind.BBOX,
    prior_radius: int = 20,
) -> Path:
    """
    Write synthetic images, ground truths and a manifest to a directory.

    Args:
        directory: Output directory (created if missing)
        n: Number of images
        seed: Seed of the generator
        shape: Image dimensions
        noise: Noise standard deviation in LAB units
        kind: Bounding box entries (bbox_error) or oracle prior maps (overlap)
        prior_radius: Dilation radius of the oracle prior

    Returns:
        Path of the manifest file
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for index in range(n):
        sample = make_synthetic(rng, shape, noise)
        image_path = Path(f"synthetic_{index:03d}.png")
        gt_path = Path(f"synthetic_{index:03d}_gt.png")
        Image.fromarray(sample.to_rgb()).save(directory / image_path, format="PNG")
        write_mask(sample.groundtruth, directory / gt_path)
        if kind == EntryKind.PRIOR:
            prior_path = f"synthetic_{index:03d}_prior.npy"
            np.save(directory / prior_path, oracle_prior(sample.groundtruth, prior_radius))
            entries.append(ManifestEntry(image_path, gt_path, kind, prior_path, Metric.OVERLAP))
        elif kind == EntryKind.BBOX:
            entries.append(
                ManifestEntry(image_path, gt_path, kind, str(sample.bbox), Metric.BBOX_ERROR)
            )
        else:
            raise ValueError(f"Unsupported entry kind for synthetic datasets: {kind}")
    manifest = directory / "manifest.tsv"
    write_manifest(entries, manifest)
    return manifest
