"""Raster types and bit-packed binary image primitives.

Binary rasters are stored one bit per pixel in little-endian 64-bit words:
column ``c`` of a row lives in word ``c // 64`` at bit ``c % 64``, with
foreground (ink, black) = 1.  Padding bits past the row width are kept at
zero so whole-word operations (shifts, AND/OR, popcount) act on pixels only.

Coordinates are (row, col), zero-based.  Bounding boxes carry the minimum
corner as (min_col, min_row) followed by (width, height).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, ParameterError

WORD_BITS = 64

_BIT_POS = np.arange(WORD_BITS, dtype=np.uint64)
_POWERS = np.left_shift(np.uint64(1), _BIT_POS)
_FULL_WORD = np.uint64(0xFFFFFFFFFFFFFFFF)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _row_mask(width: int, n_words: int) -> np.ndarray:
    """Per-word masks with ones on valid columns only."""
    mask = np.full(n_words, _FULL_WORD, dtype=np.uint64)
    rem = width % WORD_BITS
    if rem:
        mask[-1] = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
    return mask


@dataclass(frozen=True)
class GrayImage:
    """8-bit intensity raster, row-major."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError("gray image dimensions must be >= 1")
        px = np.asarray(self.pixels)
        if px.shape != (self.height, self.width):
            raise DimensionError(
                f"pixel buffer shape {px.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise DimensionError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", _freeze(px.copy()))

    @staticmethod
    def from_array(pixels) -> "GrayImage":
        px = np.asarray(pixels)
        if px.ndim != 2:
            raise DimensionError("gray image must be a 2-D array")
        return GrayImage(width=px.shape[1], height=px.shape[0], pixels=px)


@dataclass(frozen=True)
class BinaryImage:
    """Bit-packed binary raster; 1 = foreground ink."""

    width: int
    height: int
    rows: np.ndarray  # (height, n_words) uint64

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError("binary image dimensions must be >= 1")
        nw = (self.width + WORD_BITS - 1) // WORD_BITS
        rows = np.asarray(self.rows, dtype=np.uint64)
        if rows.shape != (self.height, nw):
            raise DimensionError(
                f"row buffer shape {rows.shape} does not match "
                f"{self.height} rows of {nw} words"
            )
        mask = _row_mask(self.width, nw)
        if np.any(rows & ~mask):
            raise DimensionError("padding bits beyond image width must be zero")
        object.__setattr__(self, "rows", _freeze(rows.copy()))

    @property
    def n_words(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: minimum corner (min_col, min_row) plus extents."""

    min_col: int
    min_row: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError("bounding box extents must be >= 1")
        if self.min_col < 0 or self.min_row < 0:
            raise DimensionError("bounding box corner must be non-negative")

    @property
    def max_col(self) -> int:
        return self.min_col + self.width - 1

    @property
    def max_row(self) -> int:
        return self.min_row + self.height - 1

    def area(self) -> int:
        return self.width * self.height

    def intersection_area(self, other: "BoundingBox") -> int:
        w = min(self.max_col, other.max_col) - max(self.min_col, other.min_col) + 1
        h = min(self.max_row, other.max_row) - max(self.min_row, other.min_row) + 1
        if w <= 0 or h <= 0:
            return 0
        return w * h

    def iou(self, other: "BoundingBox") -> float:
        inter = self.intersection_area(other)
        if inter == 0:
            return 0.0
        return inter / (self.area() + other.area() - inter)


@dataclass(frozen=True)
class LabelMap:
    """Row-major component ids; 0 = background, components 1..count."""

    width: int
    height: int
    labels: np.ndarray  # (height, width) int32
    count: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int32)
        if lab.shape != (self.height, self.width):
            raise DimensionError("label buffer shape does not match dimensions")
        object.__setattr__(self, "labels", _freeze(lab.copy()))


@dataclass(frozen=True)
class StructuringElement:
    """Solid rectangle probe with origin at (m // 2, n // 2)."""

    m: int  # rows
    n: int  # cols

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ParameterError("structuring element dimensions must be >= 1")

    @property
    def origin(self) -> tuple[int, int]:
        return (self.m // 2, self.n // 2)


def pack(bits) -> BinaryImage:
    """Pack a row-major 0/1 matrix into a BinaryImage.

    Raises DimensionError for ragged or empty input.
    """
    try:
        arr = np.asarray(bits)
    except ValueError as exc:  # ragged nested lists
        raise DimensionError("input must be a rectangular 2-D 0/1 matrix") from exc
    if arr.dtype == object or arr.ndim != 2:
        raise DimensionError("input must be a rectangular 2-D 0/1 matrix")
    if arr.size == 0:
        raise DimensionError("input matrix must be non-empty")
    h, w = arr.shape
    nw = (w + WORD_BITS - 1) // WORD_BITS
    padded = np.zeros((h, nw * WORD_BITS), dtype=np.uint64)
    padded[:, :w] = arr != 0
    rows = (padded.reshape(h, nw, WORD_BITS) * _POWERS).sum(axis=2, dtype=np.uint64)
    return BinaryImage(width=w, height=h, rows=rows)


def unpack(img: BinaryImage) -> np.ndarray:
    """Expand a BinaryImage back to a (height, width) uint8 0/1 matrix."""
    expanded = (img.rows[:, :, None] >> _BIT_POS) & np.uint64(1)
    return expanded.reshape(img.height, -1)[:, : img.width].astype(np.uint8)


def complement(img: BinaryImage) -> BinaryImage:
    """Flip every pixel; padding bits stay zero."""
    mask = _row_mask(img.width, img.n_words)
    return BinaryImage(img.width, img.height, ~img.rows & mask)


def shift_cols(rows: np.ndarray, shift: int, width: int) -> np.ndarray:
    """Shift packed rows along columns; content at c moves to c + shift.

    Vacated positions fill with zero and padding bits are re-cleared, so
    pixels pushed past either edge of the image are dropped.
    """
    h, nw = rows.shape
    out = np.zeros_like(rows)
    if abs(shift) >= width:
        return out
    words, bits = divmod(abs(shift), WORD_BITS)
    ubits = np.uint64(bits)
    if shift >= 0:
        body = rows[:, : nw - words]
        out[:, words:] = body << ubits
        if bits:
            out[:, words + 1 :] |= body[:, :-1] >> np.uint64(WORD_BITS - bits)
    else:
        body = rows[:, words:]
        out[:, : nw - words] = body >> ubits
        if bits:
            out[:, : nw - words - 1] |= body[:, 1:] << np.uint64(WORD_BITS - bits)
    out &= _row_mask(width, nw)
    return out


def crop(img: BinaryImage, box: BoundingBox) -> BinaryImage:
    """Cut the box region out of the image.

    Raises DimensionError when the box extends past the image bounds.
    """
    if box.max_col >= img.width or box.max_row >= img.height:
        raise DimensionError(
            f"box {box} exceeds image bounds {img.width}x{img.height}"
        )
    rows = shift_cols(img.rows[box.min_row : box.max_row + 1], -box.min_col, img.width)
    nw = (box.width + WORD_BITS - 1) // WORD_BITS
    rows = rows[:, :nw] & _row_mask(box.width, nw)
    return BinaryImage(width=box.width, height=box.height, rows=rows)


def resize_nearest(img: BinaryImage, side: int) -> BinaryImage:
    """Nearest-neighbor resample to a side x side square.

    Output pixel (r, c) samples input pixel
    (floor((r + 0.5) * height / side), floor((c + 0.5) * width / side)).
    """
    if side < 1:
        raise DimensionError("target side must be >= 1")
    if side == img.height and side == img.width:
        return img
    bits = unpack(img)
    rr = np.minimum((((np.arange(side) + 0.5) * img.height) / side).astype(np.int64), img.height - 1)
    cc = np.minimum((((np.arange(side) + 0.5) * img.width) / side).astype(np.int64), img.width - 1)
    return pack(bits[np.ix_(rr, cc)])


def foreground_count(img: BinaryImage) -> int:
    """Number of 1 bits (ink pixels)."""
    return int(np.bitwise_count(img.rows).sum())


def blank(width: int, height: int) -> BinaryImage:
    """All-background image."""
    nw = (width + WORD_BITS - 1) // WORD_BITS
    return BinaryImage(width, height, np.zeros((height, nw), dtype=np.uint64))


def tight_box(img: BinaryImage) -> Optional[BoundingBox]:
    """Smallest box covering all foreground, or None when empty."""
    bits = unpack(img)
    rows_any = bits.any(axis=1)
    if not rows_any.any():
        return None
    cols_any = bits.any(axis=0)
    r = np.flatnonzero(rows_any)
    c = np.flatnonzero(cols_any)
    return BoundingBox(
        min_col=int(c[0]),
        min_row=int(r[0]),
        width=int(c[-1] - c[0] + 1),
        height=int(r[-1] - r[0] + 1),
    )
