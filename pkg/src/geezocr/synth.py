"""Synthetic glyph pages and the plain-vs-modified segmentation harness.

Glyphs come in two kinds: connected chains of overlapping rectangles,
and disconnected stacks of bars separated by a row gap (the shape that
breaks plain bounding-box segmentation).  Pages place glyphs on a grid
with guaranteed spacing; optional salt noise lands only in the gutters,
at least 2 px away from every glyph box.  Every raster is a pure
function of the spec, so pages are reproducible from their seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, LayoutError, ParameterError, ParseError
from .image import BinaryImage, BoundingBox, GrayImage, pack, unpack
from .segmentation import SegmentedChar, SegmenterConfig, segment_modified, segment_plain

CATEGORIES = ("character", "number", "punctuation")
GLYPH_KINDS = ("connected", "disconnected")


@dataclass(frozen=True)
class GlyphSpec:
    """One logical glyph.  `seed` fixes the class shape, `variant` applies
    a +-1 size jitter on top of it, so (seed, v) for v = 0..k-1 renders k
    same-class variations."""

    kind: str
    width: int = 12
    height: int = 12
    strokes: int = 3
    gap: int = 3
    seed: int = 0
    variant: int = 0
    category: str = "character"

    def __post_init__(self):
        if self.kind not in GLYPH_KINDS:
            raise ParameterError(f"unknown glyph kind {self.kind!r}")
        if self.category not in CATEGORIES:
            raise ParameterError(f"unknown category {self.category!r}")
        if self.width < 4 or self.height < 4:
            raise ParameterError("glyph canvas must be at least 4x4")
        if self.kind == "connected":
            if self.strokes < 1:
                raise ParameterError("connected glyphs need >= 1 stroke")
        else:
            if self.strokes < 2:
                raise ParameterError("disconnected glyphs need >= 2 strokes")
            if self.gap < 1:
                raise ParameterError("gap must be >= 1")
            bar_h = (self.height - (self.strokes - 1) * self.gap) // self.strokes
            if bar_h < 1:
                raise ParameterError("strokes and gap do not fit the canvas height")


@dataclass(frozen=True)
class TruthGlyph:
    box: BoundingBox
    category: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ParameterError(f"unknown category {self.category!r}")


def _uniform_int(r: float, low: int, high: int) -> int:
    """Map one uniform draw onto [low, high]; draw count stays constant
    across variants so the class stream never desynchronizes."""
    return low + min(int(r * (high - low + 1)), high - low)


def _connected_grid(spec: GlyphSpec) -> np.ndarray:
    base = np.random.default_rng([spec.seed])
    jitter = np.random.default_rng([spec.seed, spec.variant])
    grid = np.zeros((spec.height, spec.width), dtype=np.uint8)
    max_h = max(3, spec.height // 2)
    max_w = max(3, spec.width // 2)
    prev = None
    for _ in range(spec.strokes):
        h = _uniform_int(base.random(), 3, max_h)
        w = _uniform_int(base.random(), 3, max_w)
        h = min(max(3, h + int(jitter.integers(-1, 2))), spec.height)
        w = min(max(3, w + int(jitter.integers(-1, 2))), spec.width)
        if prev is None:
            ar = _uniform_int(base.random(), 0, spec.height - 1)
            ac = _uniform_int(base.random(), 0, spec.width - 1)
        else:
            # anchor inside the previous realized rectangle keeps the
            # chain 8-connected for every variant
            pr, pc, ph, pw = prev
            ar = _uniform_int(base.random(), pr, pr + ph - 1)
            ac = _uniform_int(base.random(), pc, pc + pw - 1)
        r = _uniform_int(
            base.random(), max(0, ar - h + 1), min(ar, spec.height - h)
        )
        c = _uniform_int(base.random(), max(0, ac - w + 1), min(ac, spec.width - w))
        grid[r : r + h, c : c + w] = 1
        prev = (r, c, h, w)
    return grid


def _disconnected_grid(spec: GlyphSpec) -> np.ndarray:
    jitter = np.random.default_rng([spec.seed, spec.variant])
    grid = np.zeros((spec.height, spec.width), dtype=np.uint8)
    bar_h = (spec.height - (spec.strokes - 1) * spec.gap) // spec.strokes
    for k in range(spec.strokes):
        top = k * (bar_h + spec.gap)
        # bars keep the middle columns in common so a vertical closing
        # merges the whole stack into one component
        left = int(jitter.integers(0, 2))
        right = spec.width - 1 - int(jitter.integers(0, 2))
        grid[top : top + bar_h, left : right + 1] = 1
    return grid


def gen_glyph(spec: GlyphSpec) -> tuple[BinaryImage, BoundingBox]:
    """Render one glyph; the truth box is the tight box over all strokes."""
    if spec.kind == "connected":
        grid = _connected_grid(spec)
    else:
        grid = _disconnected_grid(spec)
    rr, cc = np.nonzero(grid)
    box = BoundingBox(
        min_col=int(cc.min()),
        min_row=int(rr.min()),
        width=int(cc.max() - cc.min() + 1),
        height=int(rr.max() - rr.min() + 1),
    )
    return pack(grid), box


def render_page(
    specs: Sequence[GlyphSpec],
    columns: int,
    spacing: int,
    margin: Optional[int] = None,
    noise: float = 0.0,
    seed: int = 0,
) -> tuple[BinaryImage, tuple[TruthGlyph, ...]]:
    """Place glyphs on a row-major grid with at least `spacing` pixels
    between neighboring canvases; salt speckles (if any) stay >= 2 px
    clear of every truth box."""
    if not specs:
        raise LayoutError("a page needs at least one glyph")
    if columns < 1:
        raise LayoutError("columns must be >= 1")
    if spacing < 1:
        raise LayoutError("glyph canvases would touch at spacing < 1")
    if not 0.0 <= noise < 1.0:
        raise ParameterError("noise must lie in [0, 1)")
    if margin is None:
        margin = spacing
    if margin < 0:
        raise LayoutError("margin must be >= 0")
    rendered = [gen_glyph(s) for s in specs]
    cell_w = max(s.width for s in specs)
    cell_h = max(s.height for s in specs)
    n_rows = math.ceil(len(specs) / columns)
    height = 2 * margin + n_rows * cell_h + (n_rows - 1) * spacing
    width = 2 * margin + columns * cell_w + (columns - 1) * spacing
    canvas = np.zeros((height, width), dtype=np.uint8)
    truths = []
    for i, (spec, (glyph, box)) in enumerate(zip(specs, rendered)):
        r0 = margin + (i // columns) * (cell_h + spacing)
        c0 = margin + (i % columns) * (cell_w + spacing)
        canvas[r0 : r0 + spec.height, c0 : c0 + spec.width] |= unpack(glyph)
        truths.append(
            TruthGlyph(
                box=BoundingBox(
                    min_col=c0 + box.min_col,
                    min_row=r0 + box.min_row,
                    width=box.width,
                    height=box.height,
                ),
                category=spec.category,
            )
        )
    if noise > 0.0:
        allowed = np.ones((height, width), dtype=bool)
        for t in truths:
            allowed[
                max(0, t.box.min_row - 2) : t.box.max_row + 3,
                max(0, t.box.min_col - 2) : t.box.max_col + 3,
            ] = False
        rng = np.random.default_rng(seed)
        canvas |= ((rng.random((height, width)) < noise) & allowed).astype(np.uint8)
    return pack(canvas), tuple(truths)


def render_gray(
    page: BinaryImage,
    ink: int = 40,
    background: int = 215,
    jitter: int = 0,
    seed: int = 0,
) -> GrayImage:
    """Turn a binary page into a grayscale one: ink and background levels
    plus an optional uniform +-jitter, clipped to [0, 255]."""
    if not 0 <= ink <= 255 or not 0 <= background <= 255:
        raise ParameterError("ink and background must lie in [0, 255]")
    if ink >= background:
        raise ParameterError("ink must be darker than the background")
    if jitter < 0:
        raise ParameterError("jitter must be >= 0")
    bits = unpack(page)
    levels = np.where(bits == 1, ink, background).astype(np.int16)
    if jitter:
        rng = np.random.default_rng(seed)
        levels += rng.integers(-jitter, jitter + 1, size=levels.shape, dtype=np.int16)
    return GrayImage.from_array(np.clip(levels, 0, 255).astype(np.uint8))


@dataclass(frozen=True)
class SegCounts:
    total: int
    correct: int
    over: int
    under: int

    def __post_init__(self):
        if min(self.total, self.correct, self.over, self.under) < 0:
            raise ParameterError("segmentation counts must be >= 0")
        if self.correct + self.over + self.under != self.total:
            raise ParameterError("segmentation counts must sum to the total")

    @property
    def correct_rate(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def over_rate(self) -> float:
        return self.over / self.total if self.total else 0.0

    @property
    def under_rate(self) -> float:
        return self.under / self.total if self.total else 0.0


def _merge_counts(counts: Sequence[SegCounts]) -> SegCounts:
    return SegCounts(
        total=sum(c.total for c in counts),
        correct=sum(c.correct for c in counts),
        over=sum(c.over for c in counts),
        under=sum(c.under for c in counts),
    )


@dataclass(frozen=True)
class SegReport:
    plain: dict
    modified: dict
    iou_threshold: float = 0.8

    def overall(self, segmenter: str) -> SegCounts:
        table = self.plain if segmenter == "plain" else self.modified
        return _merge_counts(list(table.values()))


def _classify(
    segments: Sequence[SegmentedChar],
    truths: Sequence[TruthGlyph],
    iou_threshold: float,
) -> dict:
    boxes = [s.source_box for s in segments]
    spans = [
        sum(1 for t in truths if b.intersection_area(t.box) > 0) for b in boxes
    ]
    tallies = {cat: [0, 0, 0] for cat in CATEGORIES}  # correct, over, under
    for t in truths:
        hitters = [i for i, b in enumerate(boxes) if b.intersection_area(t.box) > 0]
        if any(spans[i] >= 2 for i in hitters):
            bucket = 2
        elif len(hitters) >= 2:
            bucket = 1
        elif len(hitters) == 1 and boxes[hitters[0]].iou(t.box) >= iou_threshold:
            bucket = 0
        else:
            # nothing matched this glyph (vanished or low-overlap crop);
            # folded into under-segmented so the three buckets stay a
            # partition of the category total
            bucket = 2
        tallies[t.category][bucket] += 1
    return {
        cat: SegCounts(total=sum(v), correct=v[0], over=v[1], under=v[2])
        for cat, v in tallies.items()
    }


def compare_segmenters(
    page: BinaryImage,
    truths: Sequence[TruthGlyph],
    cfg: SegmenterConfig,
    iou_threshold: float = 0.8,
) -> SegReport:
    """Run plain and modified segmentation on the same page and bucket
    every truth glyph as correct / over- / under-segmented.  A glyph is
    correct iff exactly one segment overlaps it and their boxes reach the
    IoU threshold; a segment overlapping several glyphs marks them all
    under-segmented; several segments on one glyph mark it over-segmented."""
    plain = _classify(segment_plain(page, cfg.min_area), truths, iou_threshold)
    modified = _classify(segment_modified(page, cfg), truths, iou_threshold)
    return SegReport(plain=plain, modified=modified, iou_threshold=iou_threshold)


def format_truth_csv(truths: Sequence[TruthGlyph]) -> str:
    lines = ["# min_col,min_row,width,height,category"]
    for t in truths:
        lines.append(
            f"{t.box.min_col},{t.box.min_row},{t.box.width},{t.box.height},{t.category}"
        )
    return "\n".join(lines) + "\n"


def parse_truth_csv(text: str) -> tuple[TruthGlyph, ...]:
    truths = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ParseError("expected min_col,min_row,width,height,category", line=lineno)
        try:
            vals = [int(f) for f in fields[:4]]
        except ValueError:
            raise ParseError("bad box coordinate", line=lineno)
        category = fields[4].strip()
        if category not in CATEGORIES:
            raise ParseError(f"unknown category {category!r}", line=lineno)
        try:
            box = BoundingBox(
                min_col=vals[0], min_row=vals[1], width=vals[2], height=vals[3]
            )
        except (ParameterError, DimensionError) as exc:
            raise ParseError(str(exc), line=lineno)
        truths.append(TruthGlyph(box=box, category=category))
    return tuple(truths)


def format_seg_report(report: SegReport) -> str:
    """CSV with one row per (segmenter, category); the header comment
    carries the per-category glyph totals."""
    totals = " ".join(
        f"{cat}={report.plain[cat].total}" for cat in CATEGORIES
    )
    lines = [
        f"# glyphs: {totals} total={report.overall('plain').total} "
        f"iou_threshold={report.iou_threshold:g}",
        "segmenter,category,total,correct,over_segmented,under_segmented,"
        "correct_rate,over_rate,under_rate",
    ]
    for name, table in (("plain", report.plain), ("modified", report.modified)):
        for cat in CATEGORIES:
            c = table[cat]
            lines.append(
                f"{name},{cat},{c.total},{c.correct},{c.over},{c.under},"
                f"{c.correct_rate:.4f},{c.over_rate:.4f},{c.under_rate:.4f}"
            )
    return "\n".join(lines) + "\n"
