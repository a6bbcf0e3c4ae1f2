"""Raster value types: packing, complement, crop, resize, boxes."""

from __future__ import annotations

import numpy as np
import pytest

from geezocr.errors import DimensionError, ParameterError
from geezocr.image import (
    WORD_BITS,
    BinaryImage,
    BoundingBox,
    GrayImage,
    StructuringElement,
    _row_mask,
    blank,
    complement,
    crop,
    foreground_count,
    pack,
    resize_nearest,
    shift_cols,
    tight_box,
    unpack,
)
from reference import nearest_sample


def _padding_clean(img: BinaryImage) -> bool:
    return not np.any(img.rows & ~_row_mask(img.width, img.n_words))


def test_pack_unpack_roundtrip_random_sizes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = int(rng.integers(1, 90))
        w = int(rng.integers(1, 200))  # crosses the 64-bit word boundary often
        bits = (rng.random((h, w)) < rng.uniform(0, 1)).astype(np.uint8)
        img = pack(bits)
        assert img.width == w and img.height == h
        assert np.array_equal(unpack(img), bits)
        assert _padding_clean(img)
        assert foreground_count(img) == int(bits.sum())


def test_pack_single_pixel_and_empty_counts():
    assert foreground_count(pack([[1]])) == 1
    assert foreground_count(pack(np.zeros((2, 2)))) == 0


def test_pack_rejects_ragged_and_empty():
    with pytest.raises(DimensionError):
        pack([[1, 0], [1]])
    with pytest.raises(DimensionError):
        pack(np.zeros((0, 4)))
    with pytest.raises(DimensionError):
        pack([1, 0, 1])


def test_complement_involution_and_count():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = int(rng.integers(1, 130))
        h = int(rng.integers(1, 40))
        img = pack(rng.random((h, w)) < 0.5)
        comp = complement(img)
        assert _padding_clean(comp)
        assert foreground_count(img) + foreground_count(comp) == w * h
        assert np.array_equal(unpack(complement(comp)), unpack(img))


def test_complement_solid_examples():
    assert foreground_count(complement(pack(np.ones((3, 3))))) == 0
    center = np.zeros((5, 5))
    center[2, 2] = 1
    assert foreground_count(complement(pack(center))) == 24


def test_shift_cols_matches_index_shift():
    rng = np.random.default_rng(2)
    for _ in range(40):
        w = int(rng.integers(1, 150))
        bits = (rng.random((5, w)) < 0.5).astype(np.uint8)
        img = pack(bits)
        for s in (-w - 3, -w, -65, -64, -63, -5, -1, 0, 1, 5, 63, 64, 65, w, w + 3):
            out = shift_cols(img.rows, s, w)
            expect = np.zeros_like(bits)
            for c in range(w):
                if 0 <= c - s < w:
                    expect[:, c] = bits[:, c - s]
            assert np.array_equal(unpack(BinaryImage(w, 5, out)), expect), s


def test_crop_matches_slicing():
    rng = np.random.default_rng(3)
    for _ in range(40):
        h = int(rng.integers(2, 50))
        w = int(rng.integers(2, 170))
        bits = (rng.random((h, w)) < 0.4).astype(np.uint8)
        img = pack(bits)
        r0 = int(rng.integers(0, h))
        c0 = int(rng.integers(0, w))
        bh = int(rng.integers(1, h - r0 + 1))
        bw = int(rng.integers(1, w - c0 + 1))
        box = BoundingBox(min_col=c0, min_row=r0, width=bw, height=bh)
        sub = crop(img, box)
        assert _padding_clean(sub)
        assert np.array_equal(unpack(sub), bits[r0 : r0 + bh, c0 : c0 + bw])


def test_crop_out_of_bounds_rejected():
    img = pack(np.ones((4, 4)))
    with pytest.raises(DimensionError):
        crop(img, BoundingBox(min_col=2, min_row=0, width=3, height=2))
    with pytest.raises(DimensionError):
        crop(img, BoundingBox(min_col=0, min_row=3, width=1, height=2))


def test_resize_nearest_matches_reference_sampler():
    rng = np.random.default_rng(4)
    for _ in range(30):
        h = int(rng.integers(1, 40))
        w = int(rng.integers(1, 40))
        side = int(rng.integers(1, 50))
        bits = (rng.random((h, w)) < 0.5).astype(np.uint8)
        out = resize_nearest(pack(bits), side)
        assert out.width == side and out.height == side
        assert np.array_equal(unpack(out), nearest_sample(bits, side))


def test_resize_nearest_identity_and_validation():
    bits = (np.random.default_rng(5).random((7, 7)) < 0.5).astype(np.uint8)
    img = pack(bits)
    assert resize_nearest(img, 7) is img
    with pytest.raises(DimensionError):
        resize_nearest(img, 0)


def test_bounding_box_geometry():
    a = BoundingBox(min_col=0, min_row=0, width=4, height=4)
    b = BoundingBox(min_col=2, min_row=2, width=4, height=4)
    c = BoundingBox(min_col=10, min_row=10, width=2, height=2)
    assert a.area() == 16
    assert a.max_col == 3 and a.max_row == 3
    assert a.intersection_area(b) == 4
    assert a.iou(b) == pytest.approx(4 / 28)
    assert a.iou(a) == 1.0
    assert a.intersection_area(c) == 0 and a.iou(c) == 0.0


def test_bounding_box_validation():
    with pytest.raises(DimensionError):
        BoundingBox(min_col=0, min_row=0, width=0, height=3)
    with pytest.raises(DimensionError):
        BoundingBox(min_col=-1, min_row=0, width=1, height=1)


def test_structuring_element_origin():
    assert StructuringElement(3, 5).origin == (1, 2)
    assert StructuringElement(2, 4).origin == (1, 2)
    assert StructuringElement(1, 1).origin == (0, 0)
    with pytest.raises(ParameterError):
        StructuringElement(0, 3)


def test_tight_box_and_blank():
    assert tight_box(blank(9, 5)) is None
    bits = np.zeros((8, 8))
    bits[2, 3] = bits[5, 6] = 1
    box = tight_box(pack(bits))
    assert (box.min_col, box.min_row, box.width, box.height) == (3, 2, 4, 4)


def test_gray_image_validation():
    with pytest.raises(DimensionError):
        GrayImage(width=2, height=2, pixels=np.zeros((2, 3), dtype=np.uint8))
    img = GrayImage(width=3, height=2, pixels=np.full((2, 3), 7, dtype=np.uint8))
    assert img.pixels.shape == (2, 3)


def test_padding_invariant_word_boundaries():
    # widths straddling whole-word multiples keep their tail bits zeroed
    for w in (63, 64, 65, 127, 128, 129):
        img = pack(np.ones((3, w)))
        assert img.n_words == (w + WORD_BITS - 1) // WORD_BITS
        assert _padding_clean(img)
        assert foreground_count(img) == 3 * w
