"""Subcommand dispatcher.

Payload goes to stdout, progress and errors go to stderr with a
`[stage]` tag, and the exit code is 0 only when every stage succeeded.
`OCR_THREADS` caps per-page parallelism when recognizing a directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .classifier import KernelSpec, TrainParams
from .classifier import evaluate as evaluate_model
from .classifier import predict as predict_class
from .classifier import train as train_model
from .codec import load_class_map, load_model, parse_manifest, save_model
from .errors import GeezOcrError, MappingError, PipelineError
from .features import (
    FeatureConfig,
    assemble,
    describe_layout,
    parse_feature_config,
)
from .image import BinaryImage, BoundingBox, pack, unpack
from .morphology import area_open, dilate_rect, erode_rect, thin
from .netpbm import read_pbm, read_pgm, write_pbm
from .pipeline import (
    build_pipeline_config,
    parse_config_values,
    parse_se,
    recognize_page,
)
from .preprocess import DenoiseParams, adaptive_denoise, binarize, isodata_threshold
from .segmentation import (
    SegmentedChar,
    SegmenterConfig,
    order_reading,
    segment_modified,
    segment_plain,
)
from .synth import (
    GlyphSpec,
    compare_segmenters,
    format_seg_report,
    format_truth_csv,
    parse_truth_csv,
    render_page,
)


def _log(stage: str, msg: str) -> None:
    print(f"[{stage}] {msg}", file=sys.stderr)


def _load_glyph(path) -> SegmentedChar:
    img = read_pbm(path)
    return SegmentedChar(
        image=img,
        source_box=BoundingBox(min_col=0, min_row=0, width=img.width, height=img.height),
        order_index=0,
    )


def _feature_config(path) -> FeatureConfig:
    if path is None:
        return FeatureConfig()
    return parse_feature_config(Path(path).read_text(encoding="utf-8"))


def _featurize_manifest(manifest_path, fcfg: FeatureConfig, stage: str):
    manifest = parse_manifest(manifest_path)
    base = Path(manifest_path).parent
    samples = []
    for sample_path, class_id in manifest.rows:
        p = Path(sample_path)
        if not p.is_absolute():
            p = base / p
        samples.append((assemble(_load_glyph(p), fcfg), class_id))
    _log(stage, f"featurized {len(samples)} samples from {manifest_path}")
    return samples


def cmd_binarize(args) -> int:
    gray = read_pgm(args.input)
    params = DenoiseParams(window=args.window, noise_variance=args.noise_var)
    denoised = adaptive_denoise(gray, params)
    t = isodata_threshold(denoised)
    write_pbm(binarize(denoised, t), args.output)
    print(f"{t.value:g}")
    return 0


def cmd_morph(args) -> int:
    img = read_pbm(args.input)
    if args.op == "dilate":
        out = dilate_rect(img, parse_se(args.se))
    elif args.op == "erode":
        out = erode_rect(img, parse_se(args.se))
    elif args.op == "open":
        out = area_open(img, args.min_area)
    else:
        out = thin(img)
    write_pbm(out, args.output)
    return 0


def _burn_boxes(page: BinaryImage, boxes) -> BinaryImage:
    grid = unpack(page)
    for b in boxes:
        grid[b.min_row, b.min_col : b.max_col + 1] = 1
        grid[b.max_row, b.min_col : b.max_col + 1] = 1
        grid[b.min_row : b.max_row + 1, b.min_col] = 1
        grid[b.min_row : b.max_row + 1, b.max_col] = 1
    return pack(grid)


def cmd_segment(args) -> int:
    page = read_pbm(args.page)
    if args.mode == "plain":
        segments = segment_plain(page, args.min_area)
    else:
        cfg = SegmenterConfig(
            min_area=args.min_area,
            se_scale=args.se_scale,
            se_override=parse_se(args.se) if args.se else None,
        )
        segments = segment_modified(page, cfg)
    segments = order_reading(segments)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, seg in enumerate(segments):
        name = f"seg_{i:04d}.pbm"
        write_pbm(seg.image, out_dir / name)
        b = seg.source_box
        print(f"{name}\t{b.min_col},{b.min_row},{b.width},{b.height}")
    if args.overlay:
        write_pbm(_burn_boxes(page, [s.source_box for s in segments]), args.overlay)
    _log("segment", f"wrote {len(segments)} segments to {out_dir}")
    return 0


def cmd_features(args) -> int:
    vec = assemble(_load_glyph(args.glyph), _feature_config(args.config))
    if args.layout:
        sys.stdout.write(describe_layout(vec.layout))
    else:
        for v in vec.values:
            print(format(v, ".17g"))
    return 0


def cmd_train(args) -> int:
    fcfg = _feature_config(args.config)
    samples = _featurize_manifest(args.manifest, fcfg, "train")
    if args.map:
        class_map = load_class_map(args.map)
        for _, class_id in samples:
            if class_id >= len(class_map):
                raise MappingError(f"class id {class_id} is not mapped")
    kind = "polynomial" if args.kernel == "poly" else args.kernel
    kernel = KernelSpec(kind=kind, degree=args.degree, gamma=args.gamma, coef0=args.coef0)
    params = TrainParams(C=args.c, tol=args.tol, max_passes=args.max_passes, seed=args.seed)
    model = train_model(
        samples, kernel, params, feature_config=fcfg, class_map_ref=args.map
    )
    save_model(model, args.output)
    _log("train", f"model: {model.n_classes} classes, dim {model.dim} -> {args.output}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    fcfg = model.feature_config or FeatureConfig()
    vec = assemble(_load_glyph(args.glyph), fcfg)
    print(predict_class(model, vec))
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    fcfg = model.feature_config or FeatureConfig()
    samples = _featurize_manifest(args.manifest, fcfg, "evaluate")
    rep = evaluate_model(model, samples)
    print(f"accuracy {rep.accuracy:.6f}")
    print(f"misclassification {rep.misclassification:.6f}")
    header = "true\\pred\t" + "\t".join(str(c) for c in rep.class_ids)
    print(header)
    for i, class_id in enumerate(rep.class_ids):
        row = "\t".join(str(int(v)) for v in rep.confusion[i])
        print(f"{class_id}\t{row}")
    if args.report:
        lines = ["true_class," + ",".join(str(c) for c in rep.class_ids)]
        for i, class_id in enumerate(rep.class_ids):
            counts = ",".join(str(int(v)) for v in rep.confusion[i])
            lines.append(f"{class_id},{counts}")
        Path(args.report).write_text("\n".join(lines) + "\n", encoding="utf-8")
        from .report import save_confusion_figure

        figure = Path(args.report).with_suffix(".png")
        save_confusion_figure(rep, figure)
        _log("evaluate", f"wrote {args.report} and {figure}")
    return 0


def _worker_count(n_items: int) -> int:
    env = os.environ.get("OCR_THREADS", "")
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            cap = None
    if cap is None:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_items))


def _recognize_one(path, model, class_map, cfg):
    text, diagnostics = recognize_page(read_pgm(path), model, class_map, cfg)
    return text, diagnostics


def cmd_recognize(args) -> int:
    model = load_model(args.model)
    class_map = load_class_map(args.map)
    values = {}
    if args.config:
        values = parse_config_values(Path(args.config).read_text(encoding="utf-8"))
    if args.window is not None:
        values["window"] = args.window
    if args.min_area is not None:
        values["min_area"] = args.min_area
    if args.se_scale is not None:
        values["se_scale"] = args.se_scale
    if args.se is not None:
        values["se"] = args.se
    cfg = build_pipeline_config(values)
    source = Path(args.page)
    if source.is_dir():
        if not args.output:
            raise PipelineError("recognize", "-o OUT_DIR is required for a directory")
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        pages = sorted(source.glob("*.pgm"))
        if not pages:
            raise PipelineError("recognize", f"no .pgm pages in {source}")
        workers = _worker_count(len(pages))
        _log("recognize", f"{len(pages)} pages with {workers} workers")
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda p: _recognize_one(p, model, class_map, cfg), pages)
            )
        for page, (text, diagnostics) in zip(pages, results):
            target = out_dir / (page.stem + ".txt")
            target.write_text(text + "\n", encoding="utf-8")
            _log("recognize", f"{page.name}: {len(diagnostics)} glyphs -> {target}")
        return 0
    text, diagnostics = _recognize_one(source, model, class_map, cfg)
    if args.diagnostics:
        for i, d in enumerate(diagnostics):
            b = d.box
            _log(
                "classify",
                f"glyph {i} box={b.min_col},{b.min_row},{b.width},{b.height} "
                f"class={d.class_id} margin={d.margin:.4f}",
            )
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        _log("recognize", f"{len(diagnostics)} glyphs -> {args.output}")
    print(text)
    return 0


def cmd_synth(args) -> int:
    if not 0.0 <= args.disconnected_frac <= 1.0:
        raise PipelineError("synth", "--disconnected-frac must lie in [0, 1]")
    n = args.glyphs
    n_disc = int(math.floor(n * args.disconnected_frac + 0.5))
    rng = np.random.default_rng(args.seed)
    kinds = np.array(["disconnected"] * n_disc + ["connected"] * (n - n_disc))
    rng.shuffle(kinds)
    specs = []
    disc_seen = 0
    for i, kind in enumerate(kinds):
        if kind == "connected":
            category = "character"
        else:
            category = "number" if disc_seen % 2 == 0 else "punctuation"
            disc_seen += 1
        specs.append(
            GlyphSpec(
                kind=str(kind),
                strokes=3 if kind == "connected" else 2,
                gap=args.gap,
                seed=args.seed * 1_000_003 + i,
                category=category,
            )
        )
    columns = args.columns if args.columns > 0 else max(1, math.isqrt(n))
    page, truths = render_page(
        specs, columns=columns, spacing=args.spacing, noise=args.noise, seed=args.seed
    )
    write_pbm(page, args.output)
    Path(args.truth).write_text(format_truth_csv(truths), encoding="utf-8")
    print(f"glyphs {n} disconnected {n_disc} page {page.width}x{page.height}")
    return 0


def cmd_eval_seg(args) -> int:
    page = read_pbm(args.page)
    truths = parse_truth_csv(Path(args.truth).read_text(encoding="utf-8"))
    cfg = SegmenterConfig(
        min_area=args.min_area,
        se_scale=args.se_scale,
        se_override=parse_se(args.se) if args.se else None,
    )
    rep = compare_segmenters(page, truths, cfg, iou_threshold=args.iou)
    Path(args.report).write_text(format_seg_report(rep), encoding="utf-8")
    from .report import save_seg_figure

    figure = Path(args.report).with_suffix(".png")
    save_seg_figure(rep, figure)
    _log("eval-seg", f"wrote {args.report} and {figure}")
    for name in ("plain", "modified"):
        c = rep.overall(name)
        print(f"{name} correct {c.correct}/{c.total} ({c.correct_rate * 100:.2f}%)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geezocr",
        description="Recognition pipeline for degraded handwritten Ethiopic pages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("binarize", help="denoise a PGM page and threshold it to PBM")
    p.add_argument("--window", type=int, default=3, help="denoise window (odd, >= 3)")
    p.add_argument("--noise-var", type=float, default=None,
                   help="noise variance; estimated from the image when omitted")
    p.add_argument("input", help="input .pgm page")
    p.add_argument("output", help="output .pbm page")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("morph", help="apply one morphological operation")
    p.add_argument("--op", required=True, choices=["dilate", "erode", "open", "thin"])
    p.add_argument("--se", default="3x3", help="structuring element MxN (rows x cols)")
    p.add_argument("--min-area", type=int, default=8, help="area-open threshold")
    p.add_argument("input", help="input .pbm")
    p.add_argument("output", help="output .pbm")
    p.set_defaults(func=cmd_morph)

    p = sub.add_parser("segment", help="crop characters from a binary page")
    p.add_argument("--mode", required=True, choices=["plain", "modified"])
    group = p.add_mutually_exclusive_group()
    group.add_argument("--se", default=None, help="closing rectangle MxN override")
    group.add_argument("--se-scale", type=float, default=0.25,
                       help="closing rectangle as a fraction of the mean box")
    p.add_argument("--min-area", type=int, default=8, help="speckle cutoff")
    p.add_argument("--out-dir", required=True, help="directory for seg_%%04d.pbm crops")
    p.add_argument("--overlay", default=None,
                   help="also write the page with box outlines burned in")
    p.add_argument("page", help="input .pbm page")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", help="print the feature vector of one glyph")
    p.add_argument("--config", default=None, help="feature config file (key=value)")
    p.add_argument("--layout", action="store_true",
                   help="print group name/offset/length instead of values")
    p.add_argument("glyph", help="input .pbm glyph")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the one-vs-rest SVM from a manifest")
    p.add_argument("--manifest", required=True, help="CSV of path,id sample rows")
    p.add_argument("--kernel", default="linear",
                   choices=["linear", "poly", "polynomial"])
    p.add_argument("--degree", type=int, default=2, help="polynomial degree")
    p.add_argument("--gamma", type=float, default=1.0, help="polynomial gamma")
    p.add_argument("--coef0", type=float, default=1.0, help="polynomial coef0")
    p.add_argument("--c", type=float, default=1.0, help="soft-margin penalty")
    p.add_argument("--tol", type=float, default=1e-3, help="KKT tolerance")
    p.add_argument("--max-passes", type=int, default=50, help="solver pass cap")
    p.add_argument("--seed", type=int, default=0, help="solver shuffle seed")
    p.add_argument("--config", default=None, help="feature config file")
    p.add_argument("--map", default=None,
                   help="class map; checked against the manifest and recorded")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one glyph, print its class id")
    p.add_argument("--model", required=True)
    p.add_argument("glyph", help="input .pbm glyph")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model against a labeled manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", default=None,
                   help="write the confusion table CSV here plus a .png chart")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recognize", help="full pipeline: PGM page(s) to Ethiopic text")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True, help="class map TSV")
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--window", type=int, default=None, help="denoise window override")
    p.add_argument("--min-area", type=int, default=None, help="speckle cutoff override")
    p.add_argument("--se-scale", type=float, default=None,
                   help="closing rectangle scale override")
    p.add_argument("--se", default=None, help="closing rectangle MxN override")
    p.add_argument("--diagnostics", action="store_true",
                   help="log per-glyph box/class/margin to stderr")
    p.add_argument("-o", "--output", default=None,
                   help="output text file, or directory when the input is one")
    p.add_argument("page", help="input .pgm page or a directory of pages")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("synth", help="generate a synthetic page with ground truth")
    p.add_argument("--glyphs", type=int, required=True, help="glyph count")
    p.add_argument("--disconnected-frac", type=float, default=0.3,
                   help="fraction of glyphs with disconnected strokes")
    p.add_argument("--gap", type=int, default=3, help="stroke gap in pixels")
    p.add_argument("--noise", type=float, default=0.0, help="salt speckle probability")
    p.add_argument("--columns", type=int, default=0, help="grid columns (0 = auto)")
    p.add_argument("--spacing", type=int, default=6, help="pixels between canvases")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="page .pbm to write")
    p.add_argument("--truth", required=True, help="truth CSV to write")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval-seg", help="compare plain vs modified segmentation")
    p.add_argument("--page", required=True, help="page .pbm")
    p.add_argument("--truth", required=True, help="truth CSV from synth")
    p.add_argument("--se", default=None, help="closing rectangle MxN override")
    p.add_argument("--se-scale", type=float, default=0.25)
    p.add_argument("--min-area", type=int, default=8)
    p.add_argument("--iou", type=float, default=0.8, help="correctness IoU threshold")
    p.add_argument("--report", required=True,
                   help="report CSV; a .png chart lands next to it")
    p.set_defaults(func=cmd_eval_seg)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except GeezOcrError as exc:
        print(f"[{args.command}] {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"[io] {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
