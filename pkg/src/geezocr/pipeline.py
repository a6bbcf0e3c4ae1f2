"""Full-page recognition: denoise, threshold, segment, classify, map.

Every stage failure is re-raised as a stage-tagged error so callers can
report `[stage] message` and exit nonzero without guessing where the
pipeline stopped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .classifier import KernelSpec, SvmModel, TrainParams, decision_values
from .codec import ClassMap, labels_to_text
from .errors import GeezOcrError, ParameterError, ParseError, PipelineError
from .features import FeatureConfig, HogConfig, assemble
from .image import BoundingBox, GrayImage, StructuringElement
from .preprocess import DenoiseParams, adaptive_denoise, binarize, isodata_threshold
from .segmentation import SegmenterConfig, order_reading, segment_modified


@dataclass(frozen=True)
class PipelineConfig:
    """Union of the per-stage settings, one file format for all commands."""

    denoise: DenoiseParams = field(default_factory=DenoiseParams)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    train: TrainParams = field(default_factory=TrainParams)


_INT_KEYS = {
    "window",
    "min_area",
    "norm_side",
    "zones",
    "cell_px",
    "block_cells",
    "block_stride_cells",
    "bins",
    "degree",
    "max_passes",
    "seed",
}
_REAL_KEYS = {"noise_var", "se_scale", "gamma", "coef0", "c", "tol"}
_TEXT_KEYS = {"kernel", "se"}


def parse_se(text: str) -> StructuringElement:
    """Parse `MxN` into an M-row, N-column rectangle."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ParseError(f"bad structuring element {text!r}, expected MxN")
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"bad structuring element {text!r}, expected MxN")
    return StructuringElement(m=m, n=n)


def parse_config_values(text: str) -> dict:
    """Read line-oriented key=value pairs into a flat dict; unknown keys
    are rejected with their line number."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ParseError("expected key=value", line=lineno)
        key, val = key.strip(), val.strip()
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _REAL_KEYS:
                values[key] = float(val)
            elif key in _TEXT_KEYS:
                values[key] = val
            else:
                raise ParseError(f"unknown config key {key!r}", line=lineno)
        except ValueError:
            raise ParseError(f"bad value for {key!r}", line=lineno)
    return values


def parse_pipeline_config(text: str) -> PipelineConfig:
    return build_pipeline_config(parse_config_values(text))


def build_pipeline_config(values: dict) -> PipelineConfig:
    """Assemble a validated config from a flat key/value dict (parsed
    file contents merged with command-line overrides)."""
    unknown = set(values) - _INT_KEYS - _REAL_KEYS - _TEXT_KEYS
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    denoise = DenoiseParams(
        window=values.get("window", 3),
        noise_variance=values.get("noise_var"),
    )
    se = values.get("se")
    segmenter = SegmenterConfig(
        min_area=values.get("min_area", 8),
        se_scale=values.get("se_scale", 0.25),
        se_override=parse_se(se) if isinstance(se, str) else se,
    )
    features = FeatureConfig(
        norm_side=values.get("norm_side", 32),
        zones=values.get("zones", 5),
        hog=HogConfig(
            cell_px=values.get("cell_px", 8),
            block_cells=values.get("block_cells", 2),
            block_stride_cells=values.get("block_stride_cells", 2),
            bins=values.get("bins", 9),
        ),
    )
    kind = values.get("kernel", "linear")
    if kind == "poly":
        kind = "polynomial"
    kernel = KernelSpec(
        kind=kind,
        degree=values.get("degree", 2),
        gamma=values.get("gamma", 1.0),
        coef0=values.get("coef0", 1.0),
    )
    train = TrainParams(
        C=values.get("c", 1.0),
        tol=values.get("tol", 1e-3),
        max_passes=values.get("max_passes", 50),
        seed=values.get("seed", 0),
    )
    return PipelineConfig(
        denoise=denoise,
        segmenter=segmenter,
        features=features,
        kernel=kernel,
        train=train,
    )


@dataclass(frozen=True)
class GlyphDiagnostic:
    """Where a glyph sat on the page, what it was read as, and by how
    much the winning decision value beat the runner-up."""

    box: BoundingBox
    class_id: int
    margin: float


def _run_stage(stage: str, fn, *args):
    try:
        return fn(*args)
    except PipelineError:
        raise
    except GeezOcrError as exc:
        raise PipelineError(stage, str(exc)) from exc


def recognize_page(
    page: GrayImage,
    model: SvmModel,
    class_map: ClassMap,
    cfg: Optional[PipelineConfig] = None,
) -> tuple[str, list[GlyphDiagnostic]]:
    """Denoise, threshold, segment, order, classify, and map one page."""
    if cfg is None:
        cfg = PipelineConfig()
    denoised = _run_stage("denoise", adaptive_denoise, page, cfg.denoise)
    threshold = _run_stage("binarize", isodata_threshold, denoised)
    bits = _run_stage("binarize", binarize, denoised, threshold)
    segments = _run_stage("segment", segment_modified, bits, cfg.segmenter)
    segments = _run_stage("segment", order_reading, segments)
    feature_cfg = model.feature_config or cfg.features
    diagnostics = []
    ids = []
    for seg in segments:
        vec = _run_stage("features", assemble, seg, feature_cfg)
        scores = _run_stage("classify", decision_values, model, vec)
        order = scores.argsort()[::-1]
        class_id = model.class_ids[int(order[0])]
        margin = float(scores[order[0]] - scores[order[1]])
        ids.append(class_id)
        diagnostics.append(
            GlyphDiagnostic(box=seg.source_box, class_id=class_id, margin=margin)
        )
    text = _run_stage("map", labels_to_text, ids, class_map)
    return text, diagnostics
