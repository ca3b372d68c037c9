import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from PIL import Image

from pgmseg.imagecore import (
    BoundingBox,
    LabImage,
    Provenance,
    SegMask,
    TriMap,
    TrimapLabel,
    build_trimap,
    decode_mask,
    encode_mask,
    read_image,
    read_mask,
    read_prior,
    read_trimap,
    ring_mask,
    srgb_to_lab,
    write_mask,
)


@pytest.mark.parametrize(
    ("rgb", "lab"),
    [
        ((0, 0, 0), (0, 0, 0)),
        ((255, 255, 255), (100, 0, 0)),
        ((255, 0, 0), (53.24, 80.09, 67.20)),
        ((0, 0, 255), (32.30, 79.19, -107.86)),
    ],
)
def test_srgb_to_lab(rgb, lab):
    image = np.full((2, 3, 3), rgb, dtype=np.uint8)
    result = srgb_to_lab(image)
    assert isinstance(result, LabImage)
    assert result.shape == (2, 3)
    assert_allclose(result.lab[0, 0], lab, atol=0.05)


def test_srgb_to_lab_invalid():
    with pytest.raises(ValueError, match="8-bit"):
        srgb_to_lab(np.zeros((2, 2, 3), dtype=np.float32))
    with pytest.raises(ValueError, match="shape"):
        srgb_to_lab(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError, match="empty"):
        srgb_to_lab(np.zeros((0, 2, 3), dtype=np.uint8))


def test_read_image(tmp_path):
    gray = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    Image.fromarray(gray).save(tmp_path / "gray.png")
    rgb = read_image(tmp_path / "gray.png")
    assert rgb.shape == (3, 4, 3)
    assert rgb.dtype == np.uint8
    assert_array_equal(rgb[..., 0], gray)
    assert_array_equal(rgb[..., 2], gray)


def test_lab_image_pixels():
    lab = np.arange(2 * 3 * 3, dtype=np.float64).reshape(2, 3, 3)
    image = LabImage(lab)
    assert image.height == 2
    assert image.width == 3
    assert image.pixels().shape == (6, 3)
    assert_array_equal(image.pixels()[4], lab[1, 1])


def test_lab_image_invalid():
    with pytest.raises(ValueError):
        LabImage(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        LabImage(np.zeros((0, 2, 3)))


def test_bbox_from_string():
    bbox = BoundingBox.from_string("20 10 60 40")
    assert bbox == BoundingBox(x=20, y=10, w=60, h=40)
    assert str(bbox) == "20 10 60 40"
    assert bbox.area == 2400

    with pytest.raises(ValueError, match="four integers"):
        BoundingBox.from_string("1 2 3")
    with pytest.raises(ValueError, match="integers"):
        BoundingBox.from_string("1 2 3 x")


def test_bbox_read(tmp_path):
    path = tmp_path / "bbox.txt"
    path.write_text("1 2 3 4\n")
    assert BoundingBox.read(path) == BoundingBox(1, 2, 3, 4)


def test_bbox_mask():
    bbox = BoundingBox(1, 2, 3, 2)
    mask = bbox.mask((5, 6))
    assert np.count_nonzero(mask) == 6
    assert mask[2, 1]
    assert mask[3, 3]
    assert not mask[4, 1]
    assert not mask[2, 4]


@pytest.mark.parametrize(
    "bbox",
    [
        BoundingBox(0, 0, 0, 5),
        BoundingBox(-1, 0, 3, 3),
        BoundingBox(5, 0, 6, 3),
        BoundingBox(0, 8, 3, 3),
    ],
)
def test_bbox_check_within(bbox):
    with pytest.raises(ValueError):
        bbox.check_within((10, 10))


def test_build_trimap_bbox():
    bbox = BoundingBox(2, 1, 3, 2)
    trimap = build_trimap((4, 6), bbox=bbox)
    assert trimap.provenance == Provenance.BBOX
    assert trimap.bbox == bbox
    counts = trimap.counts()
    assert counts[TrimapLabel.UNKNOWN] == 6
    assert counts[TrimapLabel.BACKGROUND] == 18
    assert counts[TrimapLabel.FOREGROUND] == 0
    assert_array_equal(trimap.region(TrimapLabel.UNKNOWN), bbox.mask((4, 6)))


def test_build_trimap_prior():
    prior = np.array([[0.0, 0.39], [0.4, 1.0]])
    trimap = build_trimap((2, 2), prior=prior, p0=0.4)
    assert trimap.provenance == Provenance.PRIOR_MAP
    assert_array_equal(
        trimap.labels,
        [
            [TrimapLabel.BACKGROUND, TrimapLabel.BACKGROUND],
            [TrimapLabel.UNKNOWN, TrimapLabel.UNKNOWN],
        ],
    )


def test_build_trimap_file():
    labels = np.array([[0, 128], [255, 0]], dtype=np.uint8)
    trimap = build_trimap((2, 2), trimap=labels)
    assert trimap.provenance == Provenance.TRIMAP_FILE
    assert trimap.counts()[TrimapLabel.FOREGROUND] == 1


def test_build_trimap_invalid():
    with pytest.raises(ValueError, match="Exactly one"):
        build_trimap((2, 2))
    with pytest.raises(ValueError, match="Exactly one"):
        build_trimap((2, 2), bbox=BoundingBox(0, 0, 1, 1), prior=np.zeros((2, 2)))
    with pytest.raises(ValueError, match="shape"):
        build_trimap((2, 2), trimap=np.zeros((3, 2), dtype=np.uint8))
    with pytest.raises(ValueError, match="p0"):
        build_trimap((2, 2), prior=np.zeros((2, 2)), p0=1.5)
    with pytest.raises(ValueError, match="exceeds"):
        build_trimap((2, 2), bbox=BoundingBox(1, 1, 2, 2))


def test_trimap_invalid_values():
    with pytest.raises(ValueError, match="invalid values"):
        TriMap(np.array([[0, 100]], dtype=np.uint8), Provenance.TRIMAP_FILE)


def test_read_trimap_and_prior(tmp_path):
    labels = np.array([[0, 128, 255]], dtype=np.uint8)
    Image.fromarray(labels).save(tmp_path / "trimap.png")
    assert_array_equal(read_trimap(tmp_path / "trimap.png"), labels)

    Image.fromarray(np.array([[0, 255]], dtype=np.uint8)).save(tmp_path / "prior.png")
    assert_allclose(read_prior(tmp_path / "prior.png"), [[0.0, 1.0]])

    np.save(tmp_path / "prior.npy", np.array([[0.25, 0.75]]))
    assert_allclose(read_prior(tmp_path / "prior.npy"), [[0.25, 0.75]])


def test_ring_mask():
    region = np.zeros((11, 11), dtype=bool)
    region[4:7, 4:7] = True
    ring = ring_mask(region, 1)
    assert np.count_nonzero(ring) == 5 * 5 - 3 * 3
    assert not np.any(ring & region)
    assert ring[3, 3]  # diagonal neighbor, Chebyshev distance 1
    assert not ring[2, 4]

    ring = ring_mask(region, 10)
    assert np.count_nonzero(ring) == 11 * 11 - 9
    assert not np.any(ring_mask(np.zeros((3, 3), dtype=bool), 2))


def test_seg_mask():
    mask = SegMask(np.array([[True, False]]))
    assert mask.shape == (1, 2)
    assert mask == SegMask(np.array([[True, False]]))
    assert mask != SegMask(np.array([[False, False]]))
    with pytest.raises(ValueError, match="boolean"):
        SegMask(np.array([[1, 0]]))
    with pytest.raises(ValueError, match="two-dimensional"):
        SegMask(np.array([True]))


def test_mask_codec(tmp_path):
    mask = SegMask(np.array([[True, False, True], [False, False, True]]))
    data = encode_mask(mask)
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert decode_mask(data) == mask

    write_mask(mask, tmp_path / "mask.png")
    with Image.open(tmp_path / "mask.png") as image:
        assert image.mode == "L"
        assert_array_equal(np.asarray(image), [[255, 0, 255], [0, 0, 255]])
    assert read_mask(tmp_path / "mask.png") == mask


def test_decode_mask_threshold(tmp_path):
    Image.fromarray(np.array([[0, 127, 128, 255]], dtype=np.uint8)).save(tmp_path / "gt.png")
    assert_array_equal(read_mask(tmp_path / "gt.png").foreground, [[False, False, True, True]])
