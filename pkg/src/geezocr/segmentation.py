"""Character segmentation by bounding-box projection.

`segment_plain` is the baseline: area-open, label, crop each component's
tight box.  `segment_modified` closes the image with a size-adaptive
rectangle first (dilate then erode), so the strokes of one glyph that do
not touch are labeled as a single component; crops are still taken from
the pre-dilation image, only the component coordinates come from the
eroded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ._labeling import label_bits
from .errors import ParameterError
from .image import BinaryImage, BoundingBox, LabelMap, StructuringElement, crop, unpack
from .morphology import area_open, dilate_rect, erode_rect


@dataclass(frozen=True)
class SegmentedChar:
    """One cropped glyph plus where it came from on the page."""

    image: BinaryImage
    source_box: BoundingBox
    order_index: int

    def __post_init__(self):
        if (self.image.width, self.image.height) != (
            self.source_box.width,
            self.source_box.height,
        ):
            raise ParameterError("glyph image dimensions must equal its box")
        if not np.any(self.image.rows):
            raise ParameterError("glyph image must contain foreground")


@dataclass(frozen=True)
class SegmenterConfig:
    """min_area is the speckle cutoff; the closing rectangle is se_override
    when given, otherwise se_scale times the mean component box size."""

    min_area: int = 8
    se_scale: float = 0.25
    se_override: Optional[StructuringElement] = None

    def __post_init__(self):
        if self.min_area < 0:
            raise ParameterError("min_area must be >= 0")
        if not 0.0 < self.se_scale <= 2.0:
            raise ParameterError("se_scale must lie in (0, 2]")


def label_components(img: BinaryImage) -> tuple[LabelMap, int]:
    """8-connected labeling (two-pass union-find); labels 1..Ne in raster
    order of first encounter.  Diagonal contact joins components."""
    labels, count = label_bits(unpack(img), connectivity=8)
    return LabelMap(img.width, img.height, labels, count), count


def component_boxes(label_map: LabelMap, count: int) -> list[BoundingBox]:
    """Tightest box per component, ordered by label 1..count."""
    if count == 0:
        return []
    labels = label_map.labels
    rr, cc = np.nonzero(labels)
    ids = labels[rr, cc]
    min_r = np.full(count + 1, label_map.height, dtype=np.int64)
    max_r = np.full(count + 1, -1, dtype=np.int64)
    min_c = np.full(count + 1, label_map.width, dtype=np.int64)
    max_c = np.full(count + 1, -1, dtype=np.int64)
    np.minimum.at(min_r, ids, rr)
    np.maximum.at(max_r, ids, rr)
    np.minimum.at(min_c, ids, cc)
    np.maximum.at(max_c, ids, cc)
    return [
        BoundingBox(
            min_col=int(min_c[k]),
            min_row=int(min_r[k]),
            width=int(max_c[k] - min_c[k] + 1),
            height=int(max_r[k] - min_r[k] + 1),
        )
        for k in range(1, count + 1)
    ]


def segment_plain(img: BinaryImage, min_area: int = 8) -> list[SegmentedChar]:
    """Baseline bounding-box projection: one segment per 8-connected
    component of the area-opened page."""
    opened = area_open(img, min_area)
    label_map, count = label_components(opened)
    segments = []
    for idx, box in enumerate(component_boxes(label_map, count)):
        segments.append(
            SegmentedChar(image=crop(opened, box), source_box=box, order_index=idx)
        )
    return segments


def estimate_se(boxes: Sequence[BoundingBox], scale: float) -> StructuringElement:
    """Rectangle sized to scale times the mean box extent, rounded half-up
    and then up to odd, at least 1x1.

    Odd sides keep the closing centered: with the window anchored at
    floor(size/2), an even side would translate every closed component by a
    pixel, and the crops taken over those components would drift off the
    glyphs they came from.
    """
    if not boxes:
        raise ParameterError("cannot estimate a structuring element from no boxes")
    mean_h = sum(b.height for b in boxes) / len(boxes)
    mean_w = sum(b.width for b in boxes) / len(boxes)
    m = max(1, int(math.floor(scale * mean_h + 0.5)))
    n = max(1, int(math.floor(scale * mean_w + 0.5)))
    return StructuringElement(m=m + 1 - m % 2, n=n + 1 - n % 2)


def segment_modified(img: BinaryImage, cfg: SegmenterConfig) -> list[SegmentedChar]:
    """Modified bounding-box projection.

    Area-open, close with the adaptive rectangle, relabel the eroded image,
    then crop the pre-dilation image over each eroded component's row/col
    extent.  Closing only merges components, never splits, so disconnected
    strokes of one glyph come back as one segment.
    """
    opened = area_open(img, cfg.min_area)
    pre_map, pre_count = label_components(opened)
    if pre_count == 0:
        return []
    se = cfg.se_override
    if se is None:
        se = estimate_se(component_boxes(pre_map, pre_count), cfg.se_scale)
    closed = erode_rect(dilate_rect(opened, se), se)
    label_map, count = label_components(closed)
    segments = []
    for box in component_boxes(label_map, count):
        glyph = crop(opened, box)
        # a closing component can sit over pure fill with degenerate SEs;
        # such boxes contain no ink and are not characters
        if not np.any(glyph.rows):
            continue
        segments.append(
            SegmentedChar(image=glyph, source_box=box, order_index=len(segments))
        )
    return segments


def _vertical_overlap(a: BoundingBox, b: BoundingBox) -> int:
    return min(a.max_row, b.max_row) - max(a.min_row, b.min_row) + 1


def order_reading(segments: Sequence[SegmentedChar]) -> list[SegmentedChar]:
    """Reading order: lines from >= 50% vertical overlap of the smaller box,
    top-to-bottom by mean row, then left-to-right within each line."""
    n = len(segments)
    if n == 0:
        return []
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            a, b = segments[i].source_box, segments[j].source_box
            if _vertical_overlap(a, b) * 2 >= min(a.height, b.height):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    lines: dict[int, list[int]] = {}
    for i in range(n):
        lines.setdefault(find(i), []).append(i)

    def line_mean_row(members: list[int]) -> float:
        return sum(
            segments[i].source_box.min_row + (segments[i].source_box.height - 1) / 2
            for i in members
        ) / len(members)

    ordered = []
    for members in sorted(lines.values(), key=line_mean_row):
        members.sort(
            key=lambda i: (segments[i].source_box.min_col, segments[i].source_box.min_row)
        )
        ordered.extend(members)
    return [replace(segments[i], order_index=pos) for pos, i in enumerate(ordered)]
