"""Binary morphology on packed rasters.

Rectangular dilation/erosion run as a horizontal 1xn pass followed by a
vertical mx1 pass (the rectangle decomposes exactly), each pass a set of
word-parallel shift/OR (or shift/AND) sweeps over the packed rows.
Outside-of-image pixels count as background for dilation and as foreground
for erosion; that asymmetry is what makes erosion the exact complement-dual
of dilation right up to the frame edge.
"""

from __future__ import annotations

import numpy as np

from ._labeling import label_bits
from .errors import ParameterError
from .image import (
    WORD_BITS,
    BinaryImage,
    StructuringElement,
    _row_mask,
    pack,
    shift_cols,
    unpack,
)


def _entering_cols(h: int, shift: int, width: int, n_words: int) -> np.ndarray:
    """Packed rows with ones on the valid columns a shift by `shift` vacates."""
    if shift > 0:
        lo, hi = 0, min(shift, width)
    else:
        lo, hi = max(width + shift, 0), width
    block = np.zeros(n_words, dtype=np.uint64)
    for c in range(lo, hi):
        block[c // WORD_BITS] |= np.uint64(1) << np.uint64(c % WORD_BITS)
    return np.broadcast_to(block, (h, n_words))


def _h_pass(rows: np.ndarray, se: StructuringElement, width: int, dilate: bool) -> np.ndarray:
    # Both operations sample the same window of offsets [-origin, n-1-origin]
    # around each output pixel: dilation ORs the sampled copies, erosion ANDs
    # them.  Pixels sampled outside the frame are background for dilation and
    # foreground for erosion, which makes the pair exact complement-duals.
    oc = se.n // 2
    acc = None
    for s in range(oc - se.n + 1, oc + 1):
        t = shift_cols(rows, s, width)
        if not dilate and s != 0:
            t = t | _entering_cols(rows.shape[0], s, width, rows.shape[1])
        acc = t if acc is None else (acc | t if dilate else acc & t)
    return acc


def _v_pass(rows: np.ndarray, se: StructuringElement, width: int, dilate: bool) -> np.ndarray:
    om = se.m // 2
    h, nw = rows.shape
    fill = _row_mask(width, nw)
    acc = None
    for s in range(om - se.m + 1, om + 1):
        t = np.zeros_like(rows) if dilate else np.tile(fill, (h, 1))
        if s >= 0:
            if s < h:
                t[s:] = rows[: h - s]
        else:
            if -s < h:
                t[: h + s] = rows[-s:]
        acc = t if acc is None else (acc | t if dilate else acc & t)
    return acc


def dilate_rect(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Set-union dilation by an m x n rectangle anchored at (m//2, n//2)."""
    rows = _h_pass(img.rows, se, img.width, dilate=True)
    rows = _v_pass(rows, se, img.width, dilate=True)
    rows &= _row_mask(img.width, img.n_words)
    return BinaryImage(img.width, img.height, rows)


def erode_rect(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Erosion: 1 where the window anchored at (m//2, n//2) is all foreground.

    Window cells falling outside the frame count as foreground, so
    erode(x) == complement(dilate(complement(x))) holds bit-exactly for
    every rectangle.  Padding bits stay zero because the unshifted copy
    always participates in the AND.
    """
    rows = _h_pass(img.rows, se, img.width, dilate=False)
    rows = _v_pass(rows, se, img.width, dilate=False)
    return BinaryImage(img.width, img.height, rows)


def area_open(img: BinaryImage, min_area: int) -> BinaryImage:
    """Drop every 8-connected component smaller than min_area pixels."""
    if min_area < 0:
        raise ParameterError("min_area must be >= 0")
    if min_area <= 1:
        return img
    bits = unpack(img)
    labels, count = label_bits(bits, connectivity=8)
    if count == 0:
        return img
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= min_area
    keep[0] = False
    return pack(keep[labels])


def thin(img: BinaryImage) -> BinaryImage:
    """Zhang-Suen thinning: two-subcycle boundary peeling to a fixed point."""
    a = unpack(img).astype(bool)
    while True:
        removed = 0
        for phase in (0, 1):
            p = np.pad(a, 1)
            p2 = p[:-2, 1:-1]
            p3 = p[:-2, 2:]
            p4 = p[1:-1, 2:]
            p5 = p[2:, 2:]
            p6 = p[2:, 1:-1]
            p7 = p[2:, :-2]
            p8 = p[1:-1, :-2]
            p9 = p[:-2, :-2]
            ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
            b = sum(n.astype(np.uint8) for n in ring[:-1])
            transitions = sum(
                (~ring[k] & ring[k + 1]).astype(np.uint8) for k in range(8)
            )
            cond = a & (b >= 2) & (b <= 6) & (transitions == 1)
            if phase == 0:
                cond &= ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
            else:
                cond &= ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
            removed += int(cond.sum())
            a[cond] = False
        if removed == 0:
            return pack(a)
