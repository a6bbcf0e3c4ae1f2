"""Recognition pipeline for degraded handwritten Ethiopic manuscripts.

Bit-packed binary rasters, adaptive denoising with global Isodata
thresholding, word-parallel rectangular morphology, bounding-box
character segmentation (plain and closing-based), an 11-group global
feature descriptor, and a one-vs-rest SVM emitting Unicode Ethiopic
text.
"""

from .classifier import (
    EvalReport,
    KernelSpec,
    SvmModel,
    TrainParams,
    decision_values,
    evaluate,
    kernel_eval,
    predict,
    train,
)
from .codec import (
    ClassMap,
    DatasetManifest,
    labels_to_text,
    load_class_map,
    load_model,
    parse_manifest,
    save_model,
    split_manifest,
)
from .errors import (
    DimensionError,
    GeezOcrError,
    LayoutError,
    MappingError,
    ParameterError,
    ParseError,
    PipelineError,
    TrainingError,
)
from .features import (
    FeatureConfig,
    GlobalFeatureVector,
    HogConfig,
    assemble,
    feature_dim,
    normalize_glyph,
    parse_feature_config,
)
from .image import (
    BinaryImage,
    BoundingBox,
    GrayImage,
    LabelMap,
    StructuringElement,
    complement,
    crop,
    foreground_count,
    pack,
    resize_nearest,
    tight_box,
    unpack,
)
from .morphology import area_open, dilate_rect, erode_rect, thin
from .netpbm import read_pbm, read_pgm, write_pbm, write_pgm
from .pipeline import PipelineConfig, parse_pipeline_config, recognize_page
from .preprocess import (
    DenoiseParams,
    Threshold,
    adaptive_denoise,
    binarize,
    isodata_threshold,
)
from .segmentation import (
    SegmentedChar,
    SegmenterConfig,
    estimate_se,
    label_components,
    order_reading,
    segment_modified,
    segment_plain,
)
from .synth import (
    GlyphSpec,
    SegReport,
    TruthGlyph,
    compare_segmenters,
    gen_glyph,
    render_gray,
    render_page,
)

__version__ = "1.0.0"

__all__ = [
    "BinaryImage",
    "BoundingBox",
    "ClassMap",
    "DatasetManifest",
    "DenoiseParams",
    "DimensionError",
    "EvalReport",
    "FeatureConfig",
    "GeezOcrError",
    "GlobalFeatureVector",
    "GlyphSpec",
    "GrayImage",
    "HogConfig",
    "KernelSpec",
    "LabelMap",
    "LayoutError",
    "MappingError",
    "ParameterError",
    "ParseError",
    "PipelineConfig",
    "PipelineError",
    "SegReport",
    "SegmentedChar",
    "SegmenterConfig",
    "StructuringElement",
    "SvmModel",
    "Threshold",
    "TrainParams",
    "TrainingError",
    "TruthGlyph",
    "adaptive_denoise",
    "area_open",
    "assemble",
    "binarize",
    "compare_segmenters",
    "complement",
    "crop",
    "decision_values",
    "dilate_rect",
    "erode_rect",
    "estimate_se",
    "evaluate",
    "feature_dim",
    "foreground_count",
    "gen_glyph",
    "isodata_threshold",
    "kernel_eval",
    "label_components",
    "labels_to_text",
    "load_class_map",
    "load_model",
    "normalize_glyph",
    "order_reading",
    "pack",
    "parse_feature_config",
    "parse_manifest",
    "parse_pipeline_config",
    "predict",
    "read_pbm",
    "read_pgm",
    "recognize_page",
    "render_gray",
    "render_page",
    "resize_nearest",
    "save_model",
    "segment_modified",
    "segment_plain",
    "split_manifest",
    "thin",
    "tight_box",
    "train",
    "unpack",
    "write_pbm",
    "write_pgm",
]
