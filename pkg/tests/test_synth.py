"""Synthetic glyphs, page layout, and the segmentation benchmark."""

from __future__ import annotations

import numpy as np
import pytest

from geezocr.errors import LayoutError, ParameterError, ParseError
from geezocr.image import StructuringElement, unpack
from geezocr._labeling import label_bits
from geezocr.segmentation import SegmenterConfig
from geezocr.synth import (
    CATEGORIES,
    GlyphSpec,
    SegCounts,
    TruthGlyph,
    compare_segmenters,
    format_seg_report,
    format_truth_csv,
    gen_glyph,
    parse_truth_csv,
    render_gray,
    render_page,
)


def test_glyph_spec_validation():
    with pytest.raises(ParameterError):
        GlyphSpec(kind="curvy")
    with pytest.raises(ParameterError):
        GlyphSpec(kind="connected", category="letter")
    with pytest.raises(ParameterError):
        GlyphSpec(kind="connected", width=3)
    with pytest.raises(ParameterError):
        GlyphSpec(kind="connected", strokes=0)
    with pytest.raises(ParameterError):
        GlyphSpec(kind="disconnected", strokes=1)
    with pytest.raises(ParameterError):
        GlyphSpec(kind="disconnected", gap=0)
    with pytest.raises(ParameterError):
        # 12 - 5*3 = -3 rows left for 6 bars
        GlyphSpec(kind="disconnected", height=12, strokes=6, gap=3)


def test_gen_glyph_is_deterministic():
    for kind in ("connected", "disconnected"):
        spec = GlyphSpec(kind=kind, seed=5, variant=2)
        a, box_a = gen_glyph(spec)
        b, box_b = gen_glyph(spec)
        assert np.array_equal(a.rows, b.rows)
        assert box_a == box_b


def test_connected_glyph_is_one_component():
    for seed in range(30):
        for variant in range(3):
            img, box = gen_glyph(
                GlyphSpec(kind="connected", seed=seed, variant=variant)
            )
            _, count = label_bits(unpack(img), connectivity=8)
            assert count == 1
            assert box.width >= 3 and box.height >= 3


def test_disconnected_glyph_bars_and_gaps():
    spec = GlyphSpec(kind="disconnected", height=12, strokes=2, gap=3, seed=1)
    img, box = gen_glyph(spec)
    bits = unpack(img)
    _, count = label_bits(bits, connectivity=8)
    assert count == 2
    bar_h = (12 - 3) // 2  # 4
    assert np.all(bits[bar_h : bar_h + 3] == 0)  # the gap rows are empty
    assert box.min_row == 0 and box.height == 2 * bar_h + 3


def test_variants_share_the_class_shape():
    base, _ = gen_glyph(GlyphSpec(kind="connected", seed=3, variant=0))
    distinct = 0
    for v in range(1, 6):
        other, _ = gen_glyph(GlyphSpec(kind="connected", seed=3, variant=v))
        if not np.array_equal(base.rows, other.rows):
            distinct += 1
    assert distinct >= 1  # jitter actually perturbs the strokes


def test_render_page_grid_and_truth_boxes():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(6)]
    page, truths = render_page(specs, columns=3, spacing=4)
    assert len(truths) == 6
    # default margin equals spacing; cells are 12x12 on a 3x2 grid
    assert page.width == 2 * 4 + 3 * 12 + 2 * 4
    assert page.height == 2 * 4 + 2 * 12 + 1 * 4
    bits = unpack(page)
    for i, t in enumerate(truths):
        r0 = 4 + (i // 3) * (12 + 4)
        c0 = 4 + (i % 3) * (12 + 4)
        assert r0 <= t.box.min_row and t.box.max_row < r0 + 12
        assert c0 <= t.box.min_col and t.box.max_col < c0 + 12
        crop = bits[
            t.box.min_row : t.box.max_row + 1, t.box.min_col : t.box.max_col + 1
        ]
        assert crop.any()
    # glyph pixels stay inside the union of truth boxes when noise is off
    allowed = np.zeros_like(bits, dtype=bool)
    for t in truths:
        allowed[
            t.box.min_row : t.box.max_row + 1, t.box.min_col : t.box.max_col + 1
        ] = True
    assert not np.any(bits.astype(bool) & ~allowed)


def test_render_page_salt_keeps_clear_of_glyphs():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(9)]
    page, truths = render_page(specs, columns=3, spacing=8, noise=0.05, seed=7)
    bits = unpack(page)
    near = np.zeros_like(bits, dtype=bool)
    inside = np.zeros_like(bits, dtype=bool)
    for t in truths:
        near[
            max(0, t.box.min_row - 2) : t.box.max_row + 3,
            max(0, t.box.min_col - 2) : t.box.max_col + 3,
        ] = True
        inside[
            t.box.min_row : t.box.max_row + 1, t.box.min_col : t.box.max_col + 1
        ] = True
    ring = near & ~inside  # 2 px guard band around every box
    assert not np.any(bits.astype(bool) & ring)
    assert np.any(bits.astype(bool) & ~near)  # some salt actually landed
    again, _ = render_page(specs, columns=3, spacing=8, noise=0.05, seed=7)
    assert np.array_equal(page.rows, again.rows)


def test_render_page_layout_errors():
    spec = GlyphSpec(kind="connected")
    with pytest.raises(LayoutError):
        render_page([], columns=1, spacing=2)
    with pytest.raises(LayoutError):
        render_page([spec], columns=0, spacing=2)
    with pytest.raises(LayoutError):
        render_page([spec], columns=1, spacing=0)
    with pytest.raises(LayoutError):
        render_page([spec], columns=1, spacing=2, margin=-1)
    with pytest.raises(ParameterError):
        render_page([spec], columns=1, spacing=2, noise=1.0)


def test_render_gray_levels_and_jitter():
    page, _ = render_page([GlyphSpec(kind="connected", seed=0)], columns=1, spacing=3)
    bits = unpack(page)
    gray = render_gray(page, ink=40, background=215)
    assert gray.pixels.shape == bits.shape
    assert np.all(gray.pixels[bits == 1] == 40)
    assert np.all(gray.pixels[bits == 0] == 215)
    jittered = render_gray(page, ink=40, background=215, jitter=5, seed=3)
    assert np.all(np.abs(jittered.pixels.astype(int) - gray.pixels.astype(int)) <= 5)
    again = render_gray(page, ink=40, background=215, jitter=5, seed=3)
    assert np.array_equal(jittered.pixels, again.pixels)
    # clipping: background near the top of the range survives jitter
    top = render_gray(page, ink=0, background=255, jitter=10, seed=1)
    assert top.pixels.max() <= 255 and top.pixels.min() >= 0


def test_render_gray_validation():
    page, _ = render_page([GlyphSpec(kind="connected")], columns=1, spacing=3)
    with pytest.raises(ParameterError):
        render_gray(page, ink=200, background=100)
    with pytest.raises(ParameterError):
        render_gray(page, ink=100, background=100)
    with pytest.raises(ParameterError):
        render_gray(page, ink=0, background=256)
    with pytest.raises(ParameterError):
        render_gray(page, jitter=-1)


def test_seg_counts_partition_invariant():
    c = SegCounts(total=10, correct=7, over=1, under=2)
    assert c.correct_rate == 0.7
    assert c.over_rate == 0.1
    assert c.under_rate == 0.2
    assert SegCounts(total=0, correct=0, over=0, under=0).correct_rate == 0.0
    with pytest.raises(ParameterError):
        SegCounts(total=10, correct=7, over=1, under=1)
    with pytest.raises(ParameterError):
        SegCounts(total=1, correct=-1, over=1, under=1)


def test_compare_segmenters_connected_page_all_correct():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(8)]
    page, truths = render_page(specs, columns=4, spacing=6)
    cfg = SegmenterConfig(min_area=2)
    report = compare_segmenters(page, truths, cfg)
    assert report.overall("plain").correct_rate == 1.0
    assert report.overall("modified").correct_rate == 1.0


def test_compare_segmenters_disconnected_page_split_vs_merged():
    specs = [
        GlyphSpec(kind="disconnected", strokes=2, gap=3, seed=s) for s in range(6)
    ]
    page, truths = render_page(specs, columns=3, spacing=8)
    cfg = SegmenterConfig(min_area=2, se_override=StructuringElement(m=5, n=1))
    report = compare_segmenters(page, truths, cfg)
    plain = report.overall("plain")
    modified = report.overall("modified")
    # plain sees two boxes per glyph: every truth is over-segmented
    assert plain.correct == 0 and plain.over == plain.total
    assert modified.correct_rate == 1.0


def test_compare_segmenters_merged_neighbors_count_under():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(2)]
    page, truths = render_page(specs, columns=2, spacing=3)
    # closing this wide welds the two neighboring glyphs into one segment
    cfg = SegmenterConfig(min_area=2, se_override=StructuringElement(m=1, n=9))
    report = compare_segmenters(page, truths, cfg)
    modified = report.overall("modified")
    assert modified.under == modified.total == 2


def test_compare_segmenters_vanished_glyph_counts_under():
    specs = [GlyphSpec(kind="connected", seed=4)]
    page, truths = render_page(specs, columns=1, spacing=3)
    area = int(np.count_nonzero(unpack(page)))
    cfg = SegmenterConfig(min_area=area + 1)
    report = compare_segmenters(page, truths, cfg)
    assert report.overall("plain").under == 1
    assert report.overall("modified").under == 1


def test_truth_csv_roundtrip():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(3)] + [
        GlyphSpec(kind="disconnected", strokes=2, category="number", seed=9)
    ]
    _, truths = render_page(specs, columns=2, spacing=5)
    text = format_truth_csv(truths)
    assert text.startswith("# min_col,min_row,width,height,category\n")
    assert parse_truth_csv(text) == truths


@pytest.mark.parametrize(
    "line, needle",
    [
        ("1,2,3,4", "expected min_col"),
        ("1,2,3,x,character", "bad box coordinate"),
        ("1,2,3,4,letter", "unknown category"),
        ("1,2,0,4,character", "extents"),
    ],
)
def test_parse_truth_csv_errors(line, needle):
    with pytest.raises(ParseError) as e:
        parse_truth_csv(line + "\n")
    assert needle in str(e.value)
    assert e.value.line == 1


def test_format_seg_report_shape():
    specs = [GlyphSpec(kind="connected", seed=s) for s in range(4)]
    page, truths = render_page(specs, columns=2, spacing=6)
    report = compare_segmenters(page, truths, SegmenterConfig(min_area=2))
    text = format_seg_report(report)
    lines = text.splitlines()
    assert lines[0].startswith("# glyphs: character=4 number=0 punctuation=0 total=4")
    assert "iou_threshold=0.8" in lines[0]
    assert lines[1] == (
        "segmenter,category,total,correct,over_segmented,under_segmented,"
        "correct_rate,over_rate,under_rate"
    )
    assert len(lines) == 2 + 2 * len(CATEGORIES)
    assert lines[2].startswith("plain,character,4,")
    assert lines[2].endswith("1.0000,0.0000,0.0000")


def test_truth_glyph_category_validation():
    box = next(iter(parse_truth_csv("0,0,4,4,character\n"))).box
    with pytest.raises(ParameterError):
        TruthGlyph(box=box, category="digit")
