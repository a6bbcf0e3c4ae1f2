"""Class-to-codepoint mapping, dataset manifests, model persistence.

The model file is line-oriented text with every real serialized at 17
significant digits, so save -> load -> save reproduces the bytes and a
reloaded model scores identically.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .classifier import ClassDecision, KernelSpec, SvmModel
from .errors import MappingError, ParameterError, ParseError
from .features import FeatureConfig, FeatureGroup, HogConfig

ETHIOPIC_FIRST = 0x1200
ETHIOPIC_LAST = 0x137F

MODEL_MAGIC = "geezocr-svm"
MODEL_VERSION = 1

_CODEPOINT_RE = re.compile(r"^U\+([0-9A-Fa-f]{4,6})$")


@dataclass(frozen=True)
class ClassMap:
    """Dense class ids 0..n-1, each an Ethiopic codepoint plus a name."""

    codepoints: tuple[int, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.codepoints) != len(self.names):
            raise ParameterError("codepoints and names must align")
        if len(set(self.codepoints)) != len(self.codepoints):
            raise ParameterError("codepoints must be distinct")
        for cp in self.codepoints:
            if not ETHIOPIC_FIRST <= cp <= ETHIOPIC_LAST:
                raise ParameterError(f"codepoint U+{cp:04X} outside the Ethiopic block")

    def __len__(self) -> int:
        return len(self.codepoints)

    def codepoint(self, class_id: int) -> int:
        if not 0 <= class_id < len(self.codepoints):
            raise MappingError(f"class id {class_id} is not mapped")
        return self.codepoints[class_id]

    def name(self, class_id: int) -> str:
        if not 0 <= class_id < len(self.names):
            raise MappingError(f"class id {class_id} is not mapped")
        return self.names[class_id]


def load_class_map(path: Union[str, Path]) -> ClassMap:
    """Parse `id<TAB>U+XXXX<TAB>name` lines; ids must be dense from 0."""
    seen: dict[int, tuple[int, str]] = {}
    used_cp: dict[int, int] = {}
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError("expected id<TAB>codepoint<TAB>name", line=lineno)
        try:
            class_id = int(fields[0])
        except ValueError:
            raise ParseError(f"bad class id {fields[0]!r}", line=lineno)
        m = _CODEPOINT_RE.match(fields[1])
        if m is None:
            raise ParseError(f"bad codepoint {fields[1]!r}", line=lineno)
        cp = int(m.group(1), 16)
        if not ETHIOPIC_FIRST <= cp <= ETHIOPIC_LAST:
            raise ParseError(
                f"codepoint U+{cp:04X} outside U+1200..U+137F", line=lineno
            )
        if class_id in seen:
            raise ParseError(f"duplicate class id {class_id}", line=lineno)
        if cp in used_cp:
            raise ParseError(f"duplicate codepoint U+{cp:04X}", line=lineno)
        seen[class_id] = (cp, fields[2])
        used_cp[cp] = class_id
    if not seen:
        raise ParseError("class map is empty")
    if sorted(seen) != list(range(len(seen))):
        raise ParseError("class ids must be dense 0..n-1")
    ordered = [seen[i] for i in range(len(seen))]
    return ClassMap(
        codepoints=tuple(cp for cp, _ in ordered),
        names=tuple(name for _, name in ordered),
    )


def labels_to_text(ids: Sequence[int], class_map: ClassMap) -> str:
    """Concatenate the codepoints of the given class ids in order."""
    return "".join(chr(class_map.codepoint(i)) for i in ids)


@dataclass(frozen=True)
class DatasetManifest:
    """Rows of (image path, class id)."""

    rows: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for path, class_id in self.rows:
            if not path:
                raise ParameterError("manifest paths must be nonempty")
            if class_id < 0:
                raise ParameterError("class ids must be >= 0")

    def __len__(self) -> int:
        return len(self.rows)


def parse_manifest(path: Union[str, Path]) -> DatasetManifest:
    """Comma-separated `path,id` lines; `#` comments and blanks skipped."""
    rows = []
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sample_path, sep, id_text = line.rpartition(",")
        if not sep or not sample_path.strip():
            raise ParseError("expected path,id", line=lineno)
        try:
            class_id = int(id_text.strip())
        except ValueError:
            raise ParseError(f"bad class id {id_text.strip()!r}", line=lineno)
        if class_id < 0:
            raise ParseError("class ids must be >= 0", line=lineno)
        rows.append((sample_path.strip(), class_id))
    return DatasetManifest(rows=tuple(rows))


def split_manifest(
    manifest: DatasetManifest, fraction: float, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Seed-deterministic partition; the train side gets round-half-up
    fraction of the rows, both sides keep manifest order."""
    if not 0.0 < fraction < 1.0:
        raise ParameterError("fraction must lie in (0, 1)")
    n = len(manifest)
    n_train = int(math.floor(n * fraction + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return (
        DatasetManifest(rows=tuple(manifest.rows[i] for i in train_idx)),
        DatasetManifest(rows=tuple(manifest.rows[i] for i in test_idx)),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(_fmt(x) for x in v)


def save_model(model: SvmModel, path: Union[str, Path]) -> None:
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION}"]
    k = model.kernel
    if k.kind == "linear":
        lines.append("kernel linear")
    else:
        lines.append(f"kernel polynomial {k.degree} {_fmt(k.gamma)} {_fmt(k.coef0)}")
    lines.append(f"seed {model.seed}")
    lines.append(f"classmap {model.class_map_ref or '-'}")
    if model.feature_config is None:
        lines.append("config -")
    else:
        c = model.feature_config
        lines.append(
            "config "
            f"{c.norm_side} {c.zones} {c.hog.cell_px} "
            f"{c.hog.block_cells} {c.hog.block_stride_cells} {c.hog.bins}"
        )
    lines.append(f"dim {model.dim}")
    lines.append(f"classes {model.n_classes}")
    lines.append(
        "layout " + " ".join(f"{g.name}:{g.offset}:{g.length}" for g in model.layout)
    )
    lines.append("mean " + _fmt_vec(model.mean))
    lines.append("std " + _fmt_vec(model.std))
    for d in model.decisions:
        lines.append(f"class {d.class_id} {_fmt(d.bias)}")
        if k.kind == "linear":
            lines.append("weights " + _fmt_vec(d.weights))
        else:
            lines.append(f"support {d.support.shape[0]}")
            for coef, row in zip(d.dual_coef, d.support):
                lines.append(_fmt(coef) + " " + _fmt_vec(row))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _LineReader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self, expect: str) -> list[str]:
        if self.pos >= len(self.lines):
            raise ParseError(f"file truncated, expected {expect!r}")
        line = self.lines[self.pos]
        self.pos += 1
        fields = line.split(" ")
        if fields[0] != expect:
            raise ParseError(f"expected {expect!r}", line=self.pos)
        return fields[1:]


def _parse_reals(fields: list[str], count: int, what: str, lineno: int) -> np.ndarray:
    if len(fields) != count:
        raise ParseError(f"{what} needs {count} values, got {len(fields)}", line=lineno)
    try:
        return np.array([float(f) for f in fields], dtype=np.float64)
    except ValueError:
        raise ParseError(f"bad real in {what}", line=lineno)


def load_model(path: Union[str, Path]) -> SvmModel:
    text = Path(path).read_text(encoding="utf-8")
    r = _LineReader(text.splitlines())
    magic = r.next(MODEL_MAGIC)
    if len(magic) != 1 or magic[0] != str(MODEL_VERSION):
        raise ParseError(
            f"unsupported model format version {' '.join(magic)!r}", line=1
        )
    kf = r.next("kernel")
    if kf == ["linear"]:
        kernel = KernelSpec(kind="linear")
    elif len(kf) == 4 and kf[0] == "polynomial":
        try:
            kernel = KernelSpec(
                kind="polynomial",
                degree=int(kf[1]),
                gamma=float(kf[2]),
                coef0=float(kf[3]),
            )
        except ValueError:
            raise ParseError("bad kernel parameters", line=r.pos)
    else:
        raise ParseError("bad kernel line", line=r.pos)
    seed = int(r.next("seed")[0])
    cm = " ".join(r.next("classmap"))
    class_map_ref = None if cm == "-" else cm
    cf = r.next("config")
    if cf == ["-"]:
        feature_config = None
    else:
        if len(cf) != 6:
            raise ParseError("config needs 6 integers", line=r.pos)
        try:
            ints = [int(x) for x in cf]
        except ValueError:
            raise ParseError("bad config integer", line=r.pos)
        feature_config = FeatureConfig(
            norm_side=ints[0],
            zones=ints[1],
            hog=HogConfig(
                cell_px=ints[2],
                block_cells=ints[3],
                block_stride_cells=ints[4],
                bins=ints[5],
            ),
        )
    dim = int(r.next("dim")[0])
    n_classes = int(r.next("classes")[0])
    layout = []
    for part in r.next("layout"):
        name, off, length = part.rsplit(":", 2)
        layout.append(FeatureGroup(name=name, offset=int(off), length=int(length)))
    mean = _parse_reals(r.next("mean"), dim, "mean", r.pos)
    std = _parse_reals(r.next("std"), dim, "std", r.pos)
    decisions = []
    for _ in range(n_classes):
        cfields = r.next("class")
        if len(cfields) != 2:
            raise ParseError("class line needs id and bias", line=r.pos)
        class_id, bias = int(cfields[0]), float(cfields[1])
        if kernel.kind == "linear":
            w = _parse_reals(r.next("weights"), dim, "weights", r.pos)
            decisions.append(ClassDecision(class_id=class_id, bias=bias, weights=w))
        else:
            n_sv = int(r.next("support")[0])
            support = np.empty((n_sv, dim), dtype=np.float64)
            dual = np.empty(n_sv, dtype=np.float64)
            for i in range(n_sv):
                if r.pos >= len(r.lines):
                    raise ParseError("file truncated inside support vectors")
                fields = r.lines[r.pos].split(" ")
                r.pos += 1
                row = _parse_reals(fields, dim + 1, "support vector", r.pos)
                dual[i] = row[0]
                support[i] = row[1:]
            decisions.append(
                ClassDecision(
                    class_id=class_id, bias=bias, support=support, dual_coef=dual
                )
            )
    r.next("end")
    return SvmModel(
        kernel=kernel,
        dim=dim,
        decisions=tuple(decisions),
        mean=mean,
        std=std,
        layout=tuple(layout),
        feature_config=feature_config,
        class_map_ref=class_map_ref,
        seed=seed,
    )
