"""Class maps, manifests, and the text model format."""

from __future__ import annotations

import numpy as np
import pytest

from geezocr.classifier import KernelSpec, TrainParams, decision_matrix, train
from geezocr.codec import (
    ClassMap,
    DatasetManifest,
    labels_to_text,
    load_class_map,
    load_model,
    parse_manifest,
    save_model,
    split_manifest,
)
from geezocr.errors import MappingError, ParameterError, ParseError
from geezocr.features import FeatureConfig, HogConfig


def _blob_samples(seed, n_classes=3, per_class=10, dim=6):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 1, (n_classes, dim))
    return [
        (centers[c] + rng.normal(0, 0.2, dim), c)
        for c in range(n_classes)
        for _ in range(per_class)
    ]


def test_class_map_accessors_and_validation():
    cm = ClassMap(codepoints=(0x1200, 0x1201), names=("ha", "hu"))
    assert len(cm) == 2
    assert cm.codepoint(1) == 0x1201
    assert cm.name(0) == "ha"
    with pytest.raises(MappingError):
        cm.codepoint(2)
    with pytest.raises(MappingError):
        cm.name(-1)
    with pytest.raises(ParameterError):
        ClassMap(codepoints=(0x1200,), names=("a", "b"))
    with pytest.raises(ParameterError):
        ClassMap(codepoints=(0x1200, 0x1200), names=("a", "b"))
    with pytest.raises(ParameterError):
        ClassMap(codepoints=(0x11FF,), names=("a",))


def test_load_class_map_parses_comments_and_blanks(tmp_path):
    p = tmp_path / "classes.tsv"
    p.write_text(
        "# header\n\n0\tU+1200\tha\n1\tU+1201\thu\n2\tU+1202\thi\n",
        encoding="utf-8",
    )
    cm = load_class_map(p)
    assert cm.codepoints == (0x1200, 0x1201, 0x1202)
    assert cm.names == ("ha", "hu", "hi")


@pytest.mark.parametrize(
    "body, lineno, needle",
    [
        ("0\tU+1200\n", 1, "id<TAB>codepoint<TAB>name"),
        ("x\tU+1200\tha\n", 1, "bad class id"),
        ("0\t1200\tha\n", 1, "bad codepoint"),
        ("0\tU+1380\tha\n", 1, "outside U+1200..U+137F"),
        ("0\tU+1200\tha\n0\tU+1201\thu\n", 2, "duplicate class id"),
        ("0\tU+1200\tha\n1\tU+1200\thu\n", 2, "duplicate codepoint"),
        ("0\tU+1200\tha\n2\tU+1201\thu\n", None, "dense 0..n-1"),
        ("# only comments\n", None, "empty"),
    ],
)
def test_load_class_map_errors(tmp_path, body, lineno, needle):
    p = tmp_path / "bad.tsv"
    p.write_text(body, encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_class_map(p)
    assert needle in str(e.value)
    assert e.value.line == lineno


def test_labels_to_text_emits_ethiopic():
    cm = ClassMap(codepoints=(0x1200, 0x1201), names=("ha", "hu"))
    assert labels_to_text([0, 1], cm) == "ሀሁ"
    assert labels_to_text([], cm) == ""
    with pytest.raises(MappingError):
        labels_to_text([5], cm)


def test_parse_manifest_keeps_commas_in_paths(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text(
        "# corpus\nglyphs/a.pbm,0\ndir,with,commas/b.pbm,12\n\n", encoding="utf-8"
    )
    m = parse_manifest(p)
    assert m.rows == (("glyphs/a.pbm", 0), ("dir,with,commas/b.pbm", 12))


@pytest.mark.parametrize(
    "body, needle",
    [
        ("no-comma-here\n", "expected path,id"),
        (",3\n", "expected path,id"),
        ("a.pbm,x\n", "bad class id"),
        ("a.pbm,-1\n", ">= 0"),
    ],
)
def test_parse_manifest_errors(tmp_path, body, needle):
    p = tmp_path / "bad.csv"
    p.write_text(body, encoding="utf-8")
    with pytest.raises(ParseError) as e:
        parse_manifest(p)
    assert needle in str(e.value)


def test_split_manifest_half_up_partition_and_determinism():
    rows = tuple((f"g{i}.pbm", i % 4) for i in range(11))
    m = DatasetManifest(rows=rows)
    a_train, a_test = split_manifest(m, 0.5, seed=9)
    b_train, b_test = split_manifest(m, 0.5, seed=9)
    # round-half-up: 11 * 0.5 = 5.5 -> 6 on the train side
    assert len(a_train) == 6 and len(a_test) == 5
    assert a_train.rows == b_train.rows and a_test.rows == b_test.rows
    assert sorted(a_train.rows + a_test.rows) == sorted(rows)
    # both sides preserve original manifest order
    order = {row: i for i, row in enumerate(rows)}
    for side in (a_train, a_test):
        idx = [order[r] for r in side.rows]
        assert idx == sorted(idx)
    with pytest.raises(ParameterError):
        split_manifest(m, 0.0, seed=0)
    with pytest.raises(ParameterError):
        split_manifest(m, 1.0, seed=0)


@pytest.mark.parametrize(
    "kernel",
    [KernelSpec("linear"), KernelSpec("polynomial", degree=2, gamma=0.5, coef0=1.5)],
)
def test_model_roundtrip_scores_and_bytes(tmp_path, kernel):
    samples = _blob_samples(0)
    model = train(
        samples,
        kernel,
        TrainParams(seed=11),
        feature_config=FeatureConfig(),
        class_map_ref="classes.tsv",
    )
    p1 = tmp_path / "m1.svm"
    p2 = tmp_path / "m2.svm"
    save_model(model, p1)
    loaded = load_model(p1)
    save_model(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()

    assert loaded.kernel == model.kernel
    assert loaded.seed == model.seed
    assert loaded.class_map_ref == "classes.tsv"
    assert loaded.feature_config == model.feature_config
    assert loaded.layout == model.layout

    X = np.stack([v for v, _ in samples])
    assert np.array_equal(decision_matrix(model, X), decision_matrix(loaded, X))


def test_model_roundtrip_without_optional_fields(tmp_path):
    model = train(_blob_samples(1), KernelSpec("linear"), TrainParams(seed=0))
    p = tmp_path / "m.svm"
    save_model(model, p)
    loaded = load_model(p)
    assert loaded.class_map_ref is None
    assert loaded.feature_config is None
    assert loaded.layout == model.layout  # synthetic "raw" group survives


def test_model_roundtrip_d683_config(tmp_path):
    cfg = FeatureConfig(
        norm_side=40,
        zones=7,
        hog=HogConfig(cell_px=8, block_cells=1, block_stride_cells=2, bins=59),
    )
    model = train(
        _blob_samples(2), KernelSpec("linear"), TrainParams(seed=0), feature_config=cfg
    )
    p = tmp_path / "m.svm"
    save_model(model, p)
    assert load_model(p).feature_config == cfg


def test_load_model_rejects_bad_version(tmp_path):
    p = tmp_path / "m.svm"
    p.write_text("geezocr-svm 2\n", encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_model(p)
    assert "version" in str(e.value)


def test_load_model_rejects_wrong_magic(tmp_path):
    p = tmp_path / "m.svm"
    p.write_text("not-a-model 1\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_model(p)


def test_load_model_truncation(tmp_path):
    full = tmp_path / "full.svm"
    model = train(_blob_samples(3), KernelSpec("polynomial"), TrainParams(seed=0))
    save_model(model, full)
    lines = full.read_text(encoding="utf-8").splitlines()
    for cut in (1, 3, len(lines) // 2, len(lines) - 1):
        p = tmp_path / f"cut{cut}.svm"
        p.write_text("\n".join(lines[:cut]) + "\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_model(p)


def test_load_model_rejects_corrupt_reals(tmp_path):
    full = tmp_path / "full.svm"
    model = train(_blob_samples(4), KernelSpec("linear"), TrainParams(seed=0))
    save_model(model, full)
    lines = full.read_text(encoding="utf-8").splitlines()
    mean_i = next(i for i, l in enumerate(lines) if l.startswith("mean "))
    lines[mean_i] = "mean " + " ".join(["oops"] + lines[mean_i].split(" ")[2:])
    p = tmp_path / "bad.svm"
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_model(p)
    assert "mean" in str(e.value)
