"""Global feature descriptor for normalized glyphs.

Eleven groups concatenated in a fixed order: zoning, zoning density, Hu
moments, Euler number, skeleton area, centroid, eccentricity, HOG,
extent, component count, horizontal profile.  The dimension is a pure
function of the config (240 with defaults) and the layout is recorded so
a stored model can verify it was trained with the same geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._labeling import label_bits
from .errors import ParameterError, ParseError
from .image import BinaryImage, foreground_count, resize_nearest, tight_box, unpack
from .morphology import thin
from .segmentation import SegmentedChar

GROUP_ORDER = (
    "zoning",
    "zoning-density",
    "hu-moments",
    "euler",
    "skeleton-area",
    "centroid",
    "eccentricity",
    "hog",
    "extent",
    "component-count",
    "h-profile",
)


@dataclass(frozen=True)
class HogConfig:
    cell_px: int = 8
    block_cells: int = 2
    block_stride_cells: int = 2
    bins: int = 9

    def __post_init__(self):
        if self.cell_px < 1 or self.block_cells < 1 or self.block_stride_cells < 1:
            raise ParameterError("HOG geometry values must be >= 1")
        if self.bins < 2:
            raise ParameterError("HOG needs at least 2 orientation bins")


@dataclass(frozen=True)
class FeatureConfig:
    norm_side: int = 32
    zones: int = 5
    hog: HogConfig = field(default_factory=HogConfig)

    def __post_init__(self):
        if self.norm_side < 1:
            raise ParameterError("norm_side must be >= 1")
        if not 1 <= self.zones <= self.norm_side:
            raise ParameterError("zones must lie in [1, norm_side]")
        if self.norm_side % self.hog.cell_px:
            raise ParameterError("norm_side must be divisible by cell_px")
        cells = self.norm_side // self.hog.cell_px
        if cells < self.hog.block_cells:
            raise ParameterError("block does not fit in the cell grid")
        if (cells - self.hog.block_cells) % self.hog.block_stride_cells:
            raise ParameterError("blocks must tile the cell grid exactly")


@dataclass(frozen=True)
class FeatureGroup:
    name: str
    offset: int
    length: int


@dataclass(frozen=True)
class GlobalFeatureVector:
    values: np.ndarray
    layout: tuple[FeatureGroup, ...]

    def __post_init__(self):
        if self.values.ndim != 1 or self.values.dtype != np.float64:
            raise ParameterError("feature values must be a 1-D float64 array")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("feature values must be finite")
        end = 0
        for g in self.layout:
            if g.offset != end:
                raise ParameterError("layout groups must be contiguous")
            end += g.length
        if end != self.values.size:
            raise ParameterError("layout lengths must sum to the dimension")
        self.values.setflags(write=False)


def normalize_glyph(g: SegmentedChar, side: int) -> BinaryImage:
    """Nearest-neighbor resize of the crop to side x side."""
    if side < 1:
        raise ParameterError("side must be >= 1")
    if not np.any(g.image.rows):
        raise ParameterError("cannot normalize an empty glyph")
    return resize_nearest(g.image, side)


def _zone_counts(img: BinaryImage, z: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-zone foreground counts and zone areas for the ZxZ partition;
    remainder pixels fall into the last row/column of zones."""
    if img.width != img.height:
        raise ParameterError("zoning expects a square image")
    side = img.width
    if z > side:
        raise ParameterError("zones must not exceed the image side")
    bits = unpack(img)
    base = side // z
    edges = [k * base for k in range(z)] + [side]
    counts = np.empty((z, z), dtype=np.float64)
    areas = np.empty((z, z), dtype=np.float64)
    for i in range(z):
        for j in range(z):
            block = bits[edges[i] : edges[i + 1], edges[j] : edges[j + 1]]
            counts[i, j] = int(block.sum())
            areas[i, j] = block.size
    return counts.ravel(), areas.ravel()


def zoning(img: BinaryImage, z: int) -> np.ndarray:
    """Per-zone ink coverage: foreground count / zone area."""
    counts, areas = _zone_counts(img, z)
    return counts / areas


def zoning_density(img: BinaryImage, z: int) -> np.ndarray:
    """Per-zone share of the glyph's total ink; zeros for an empty image."""
    counts, areas = _zone_counts(img, z)
    total = counts.sum()
    if total == 0:
        return np.zeros_like(counts)
    return counts / total


def hu_moments(img: BinaryImage) -> np.ndarray:
    """The seven Hu invariants of the foreground indicator (x = column,
    y = row); all zeros for an empty image."""
    ys, xs = np.nonzero(unpack(img))
    n = ys.size
    if n == 0:
        return np.zeros(7)
    x = xs - xs.mean()
    y = ys - ys.mean()

    def mu(p: int, q: int) -> float:
        return float(np.sum(x**p * y**q))

    def eta(p: int, q: int) -> float:
        return mu(p, q) / n ** (1 + (p + q) / 2)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03 = eta(3, 0), eta(0, 3)
    n21, n12 = eta(2, 1), eta(1, 2)
    a = n30 + n12
    b = n21 + n03
    c = n30 - 3 * n12
    d = 3 * n21 - n03
    return np.array(
        [
            n20 + n02,
            (n20 - n02) ** 2 + 4 * n11**2,
            c**2 + d**2,
            a**2 + b**2,
            c * a * (a**2 - 3 * b**2) + d * b * (3 * a**2 - b**2),
            (n20 - n02) * (a**2 - b**2) + 4 * n11 * a * b,
            d * a * (a**2 - 3 * b**2) - c * b * (3 * a**2 - b**2),
        ]
    )


def euler_number(img: BinaryImage) -> int:
    """Objects minus holes: 8-connected foreground components minus
    4-connected background components that do not touch the border."""
    bits = unpack(img)
    _, n_fg = label_bits(bits, connectivity=8)
    bg_labels, n_bg = label_bits((1 - bits).astype(np.uint8), connectivity=4)
    if n_bg == 0:
        return n_fg
    border = np.unique(
        np.concatenate(
            [bg_labels[0], bg_labels[-1], bg_labels[:, 0], bg_labels[:, -1]]
        )
    )
    touching = int(np.count_nonzero(border))
    return n_fg - (n_bg - touching)


def skeleton_area(img: BinaryImage) -> float:
    """Pixel count of the thinned glyph over the image area."""
    return foreground_count(thin(img)) / (img.width * img.height)


def centroid(img: BinaryImage) -> np.ndarray:
    """(mean row, mean col) of the foreground, each divided by the image
    side; (0, 0) for an empty image."""
    ys, xs = np.nonzero(unpack(img))
    if ys.size == 0:
        return np.zeros(2)
    return np.array([ys.mean() / img.height, xs.mean() / img.width])


def eccentricity(img: BinaryImage) -> float:
    """sqrt(1 - lmin/lmax) from the eigenvalues of the foreground
    coordinate covariance; 0 for fewer than 2 pixels or a degenerate
    spread (equal eigenvalues give 0, a perfect line gives 1)."""
    ys, xs = np.nonzero(unpack(img))
    if ys.size < 2:
        return 0.0
    y = ys - ys.mean()
    x = xs - xs.mean()
    vr = float(np.mean(y * y))
    vc = float(np.mean(x * x))
    cov = float(np.mean(y * x))
    half = math.hypot((vr - vc) / 2, cov)
    lmax = (vr + vc) / 2 + half
    lmin = max((vr + vc) / 2 - half, 0.0)
    if lmax <= 0.0:
        return 0.0
    return math.sqrt(1.0 - lmin / lmax)


def hog(img: BinaryImage, cfg: HogConfig) -> np.ndarray:
    """Block-normalized orientation histograms of the 0/1 raster.

    Central-difference gradients with replicated borders; unsigned angle
    in [0, 180) voted into the two nearest bin centers (centers at
    k*180/bins, wrapping at 180); per-block L2 normalization where zero
    blocks stay zero; blocks and their cells concatenated row-major.
    """
    side = img.width
    if img.height != side:
        raise ParameterError("hog expects a square image")
    if side % cfg.cell_px:
        raise ParameterError("image side must be divisible by cell_px")
    cells = side // cfg.cell_px
    if cells < cfg.block_cells or (cells - cfg.block_cells) % cfg.block_stride_cells:
        raise ParameterError("blocks must tile the cell grid exactly")
    f = unpack(img).astype(np.float64)
    padded = np.pad(f, 1, mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    pos = ang / (180.0 / cfg.bins)
    low = np.floor(pos)
    frac = pos - low
    i0 = low.astype(np.int64) % cfg.bins
    i1 = (i0 + 1) % cfg.bins
    cell_idx = (
        (np.arange(side)[:, None] // cfg.cell_px) * cells
        + np.arange(side)[None, :] // cfg.cell_px
    )
    hist = np.zeros(cells * cells * cfg.bins)
    np.add.at(hist, (cell_idx * cfg.bins + i0).ravel(), (mag * (1.0 - frac)).ravel())
    np.add.at(hist, (cell_idx * cfg.bins + i1).ravel(), (mag * frac).ravel())
    hist3 = hist.reshape(cells, cells, cfg.bins)
    blocks = []
    span = cfg.block_cells
    for br in range(0, cells - span + 1, cfg.block_stride_cells):
        for bc in range(0, cells - span + 1, cfg.block_stride_cells):
            block = hist3[br : br + span, bc : bc + span, :].ravel()
            norm = np.linalg.norm(block)
            blocks.append(block / norm if norm > 0 else block)
    return np.concatenate(blocks)


def extent(img: BinaryImage) -> float:
    """Foreground count over the tight bounding-box area; 0 if empty."""
    box = tight_box(img)
    if box is None:
        return 0.0
    return foreground_count(img) / box.area()


def component_count(img: BinaryImage) -> int:
    """Number of 8-connected foreground components."""
    _, count = label_bits(unpack(img), connectivity=8)
    return count


def h_profile(img: BinaryImage) -> np.ndarray:
    """Per-row foreground count divided by the side length."""
    if img.width != img.height:
        raise ParameterError("h_profile expects a square image")
    counts = np.bitwise_count(img.rows).sum(axis=1, dtype=np.int64)
    return counts / img.width


def hog_length(cfg: FeatureConfig) -> int:
    cells = cfg.norm_side // cfg.hog.cell_px
    per_side = (cells - cfg.hog.block_cells) // cfg.hog.block_stride_cells + 1
    return per_side * per_side * cfg.hog.block_cells**2 * cfg.hog.bins


def group_lengths(cfg: FeatureConfig) -> dict[str, int]:
    z2 = cfg.zones * cfg.zones
    return {
        "zoning": z2,
        "zoning-density": z2,
        "hu-moments": 7,
        "euler": 1,
        "skeleton-area": 1,
        "centroid": 2,
        "eccentricity": 1,
        "hog": hog_length(cfg),
        "extent": 1,
        "component-count": 1,
        "h-profile": cfg.norm_side,
    }


def feature_dim(cfg: FeatureConfig) -> int:
    return sum(group_lengths(cfg).values())


def assemble(g: SegmentedChar, cfg: FeatureConfig) -> GlobalFeatureVector:
    """Normalize the glyph and concatenate all 11 groups in canonical
    order, recording the layout."""
    img = normalize_glyph(g, cfg.norm_side)
    parts = {
        "zoning": zoning(img, cfg.zones),
        "zoning-density": zoning_density(img, cfg.zones),
        "hu-moments": hu_moments(img),
        "euler": np.array([float(euler_number(img))]),
        "skeleton-area": np.array([skeleton_area(img)]),
        "centroid": centroid(img),
        "eccentricity": np.array([eccentricity(img)]),
        "hog": hog(img, cfg.hog),
        "extent": np.array([extent(img)]),
        "component-count": np.array([float(component_count(img))]),
        "h-profile": h_profile(img),
    }
    layout = []
    offset = 0
    for name in GROUP_ORDER:
        layout.append(FeatureGroup(name=name, offset=offset, length=parts[name].size))
        offset += parts[name].size
    values = np.concatenate([parts[name] for name in GROUP_ORDER])
    return GlobalFeatureVector(values=values, layout=tuple(layout))


_CONFIG_KEYS = (
    "norm_side",
    "zones",
    "cell_px",
    "block_cells",
    "block_stride_cells",
    "bins",
)


def parse_feature_config(text: str) -> FeatureConfig:
    """Read a line-oriented key=value config; missing keys keep their
    defaults, unknown keys are rejected."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ParseError("expected key=value", line=lineno)
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ParseError(f"unknown config key {key!r}", line=lineno)
        if key in values:
            raise ParseError(f"duplicate config key {key!r}", line=lineno)
        try:
            values[key] = int(val.strip())
        except ValueError:
            raise ParseError(f"value for {key!r} is not an integer", line=lineno)
    hog_kwargs = {
        k: values[k]
        for k in ("cell_px", "block_cells", "block_stride_cells", "bins")
        if k in values
    }
    top_kwargs = {k: values[k] for k in ("norm_side", "zones") if k in values}
    return FeatureConfig(hog=HogConfig(**hog_kwargs), **top_kwargs)


def format_feature_config(cfg: FeatureConfig) -> str:
    """Inverse of parse_feature_config; one key per line."""
    lines = [
        f"norm_side={cfg.norm_side}",
        f"zones={cfg.zones}",
        f"cell_px={cfg.hog.cell_px}",
        f"block_cells={cfg.hog.block_cells}",
        f"block_stride_cells={cfg.hog.block_stride_cells}",
        f"bins={cfg.hog.bins}",
    ]
    return "\n".join(lines) + "\n"


def describe_layout(layout: Sequence[FeatureGroup]) -> str:
    """Tab-separated name/offset/length table, one group per line."""
    return "\n".join(f"{g.name}\t{g.offset}\t{g.length}" for g in layout) + "\n"
