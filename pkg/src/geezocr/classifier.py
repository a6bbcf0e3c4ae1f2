"""One-vs-rest multiclass SVM with linear and polynomial kernels.

Each class gets a binary soft-margin subproblem (that class = +1, rest
= -1) solved by a deterministic SMO-style dual solver over a kernel
matrix shared across subproblems.  Features are standardized per
dimension before the kernel; the statistics live in the model.  Linear
subproblems collapse their duals into a primal weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, ParameterError, TrainingError
from .features import FeatureConfig, FeatureGroup, GlobalFeatureVector

KERNEL_KINDS = ("linear", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    """linear: K(x,y) = <x,y>; polynomial: (gamma*<x,y> + coef0)^degree."""

    kind: str = "linear"
    degree: int = 2
    gamma: float = 1.0
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.degree < 1:
            raise ParameterError("degree must be >= 1")
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")


@dataclass(frozen=True)
class TrainParams:
    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ParameterError("C must be positive")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.max_passes < 1:
            raise ParameterError("max_passes must be >= 1")


@dataclass(frozen=True)
class ClassDecision:
    """Decision data for one class: a primal weight vector for the linear
    kernel, support vectors (standardized) plus dual coefficients
    otherwise."""

    class_id: int
    bias: float
    weights: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None
    dual_coef: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SvmModel:
    kernel: KernelSpec
    dim: int
    decisions: tuple[ClassDecision, ...]
    mean: np.ndarray
    std: np.ndarray
    layout: tuple[FeatureGroup, ...]
    feature_config: Optional[FeatureConfig] = None
    class_map_ref: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if len(self.decisions) < 2:
            raise ParameterError("a model needs at least 2 classes")
        if self.mean.shape != (self.dim,) or self.std.shape != (self.dim,):
            raise DimensionError("standardization stats must have length D")
        if np.any(self.std <= 0):
            raise ParameterError("standardization scales must be positive")
        if sum(g.length for g in self.layout) != self.dim:
            raise DimensionError("layout lengths must sum to D")
        ids = [d.class_id for d in self.decisions]
        if ids != sorted(set(ids)):
            raise ParameterError("class ids must be unique and ascending")
        for d in self.decisions:
            if self.kernel.kind == "linear":
                if d.weights is None or d.weights.shape != (self.dim,):
                    raise DimensionError("linear class data needs a D-length weight")
            else:
                if d.support is None or d.dual_coef is None:
                    raise DimensionError("kernel class data needs support vectors")
                if d.support.ndim != 2 or d.support.shape[1] != self.dim:
                    raise DimensionError("support vectors must be (n_sv, D)")
                if d.dual_coef.shape != (d.support.shape[0],):
                    raise DimensionError("dual coefficients must match support count")
        self.mean.setflags(write=False)
        self.std.setflags(write=False)
        for d in self.decisions:
            for arr in (d.weights, d.support, d.dual_coef):
                if arr is not None:
                    arr.setflags(write=False)

    @property
    def n_classes(self) -> int:
        return len(self.decisions)

    @property
    def class_ids(self) -> tuple[int, ...]:
        return tuple(d.class_id for d in self.decisions)


def kernel_eval(k: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError("kernel arguments must be vectors of equal length")
    dot = float(np.dot(x, y))
    if k.kind == "linear":
        return dot
    return (k.gamma * dot + k.coef0) ** k.degree


def _kernel_matrix(k: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dots = a @ b.T
    if k.kind == "linear":
        return dots
    return (k.gamma * dots + k.coef0) ** k.degree


def _solve_binary(
    K: np.ndarray, y: np.ndarray, p: TrainParams, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Simplified SMO on one binary subproblem.  Each pass recomputes the
    KKT violations, walks the violators in a seeded shuffled order, and
    pairs each with the index of largest |E_i - E_j|; decision scores are
    maintained incrementally."""
    n = y.size
    alpha = np.zeros(n)
    b = 0.0
    scores = np.zeros(n)

    def step(i: int, j: int) -> bool:
        nonlocal b, scores
        if i == j:
            return False
        ei = scores[i] - y[i]
        ej = scores[j] - y[j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            low, high = max(0.0, aj - ai), min(p.C, p.C + aj - ai)
        else:
            low, high = max(0.0, ai + aj - p.C), min(p.C, ai + aj)
        if high - low < 1e-12:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0.0:
            return False
        aj_new = min(max(aj - y[j] * (ei - ej) / eta, low), high)
        if abs(aj_new - aj) < 1e-12:
            return False
        ai_new = ai + y[i] * y[j] * (aj - aj_new)
        b1 = b - ei - y[i] * (ai_new - ai) * K[i, i] - y[j] * (aj_new - aj) * K[i, j]
        b2 = b - ej - y[i] * (ai_new - ai) * K[i, j] - y[j] * (aj_new - aj) * K[j, j]
        if 0.0 < ai_new < p.C:
            b_new = b1
        elif 0.0 < aj_new < p.C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        scores += (
            y[i] * (ai_new - ai) * K[i]
            + y[j] * (aj_new - aj) * K[j]
            + (b_new - b)
        )
        alpha[i], alpha[j], b = ai_new, aj_new, b_new
        return True

    for _ in range(p.max_passes):
        margin = y * (scores - y)
        viol = np.maximum(
            np.where(alpha < p.C, -margin, 0.0),
            np.where(alpha > 0.0, margin, 0.0),
        )
        if float(viol.max()) <= p.tol:
            break
        order = np.flatnonzero(viol > p.tol)
        rng.shuffle(order)
        for i in order:
            mi = y[i] * (scores[i] - y[i])
            if not (
                (alpha[i] < p.C and mi < -p.tol) or (alpha[i] > 0.0 and mi > p.tol)
            ):
                continue
            diff = np.abs((scores[i] - y[i]) - (scores - y))
            diff[i] = -1.0
            if step(i, int(np.argmax(diff))):
                continue
            # the heuristic pair was unusable (bounds or curvature); scan
            # the rest so one stubborn index cannot stall a whole pass
            for j in range(n):
                if step(i, j):
                    break
    return alpha, b


Sample = tuple[Union[GlobalFeatureVector, np.ndarray, Sequence[float]], int]


def _sample_matrix(samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray, tuple]:
    if not samples:
        raise TrainingError("training set is empty")
    rows = []
    labels = []
    layout = None
    for vec, cls in samples:
        if isinstance(vec, GlobalFeatureVector):
            if layout is None:
                layout = vec.layout
            rows.append(vec.values)
        else:
            rows.append(np.asarray(vec, dtype=np.float64))
        labels.append(int(cls))
    dim = rows[0].size
    for r in rows:
        if r.ndim != 1 or r.size != dim:
            raise TrainingError("samples must share one feature dimension")
    if layout is None:
        layout = (FeatureGroup(name="raw", offset=0, length=dim),)
    return np.stack(rows), np.asarray(labels, dtype=np.int64), layout


def train(
    samples: Sequence[Sample],
    kernel: KernelSpec,
    params: TrainParams,
    feature_config: Optional[FeatureConfig] = None,
    class_map_ref: Optional[str] = None,
) -> SvmModel:
    """Fit one binary subproblem per class over a shared kernel matrix."""
    X, labels, layout = _sample_matrix(samples)
    class_ids = sorted(set(labels.tolist()))
    if len(class_ids) < 2:
        raise TrainingError("training needs at least 2 classes")
    mean = X.mean(axis=0)
    var = X.var(axis=0)
    std = np.where(var > 0, np.sqrt(var), 1.0)
    Xs = (X - mean) / std
    K = _kernel_matrix(kernel, Xs, Xs)
    decisions = []
    for idx, cls in enumerate(class_ids):
        y = np.where(labels == cls, 1.0, -1.0)
        rng = np.random.default_rng([params.seed, idx])
        alpha, bias = _solve_binary(K, y, params, rng)
        if kernel.kind == "linear":
            decisions.append(
                ClassDecision(
                    class_id=cls, bias=bias, weights=Xs.T @ (alpha * y)
                )
            )
        else:
            keep = alpha > 1e-12
            decisions.append(
                ClassDecision(
                    class_id=cls,
                    bias=bias,
                    support=Xs[keep].copy(),
                    dual_coef=(alpha * y)[keep],
                )
            )
    return SvmModel(
        kernel=kernel,
        dim=X.shape[1],
        decisions=tuple(decisions),
        mean=mean,
        std=std,
        layout=layout,
        feature_config=feature_config,
        class_map_ref=class_map_ref,
        seed=params.seed,
    )


def _as_vector(x, dim: int) -> np.ndarray:
    v = x.values if isinstance(x, GlobalFeatureVector) else np.asarray(x, np.float64)
    if v.ndim != 1 or v.size != dim:
        raise DimensionError(f"expected a vector of dimension {dim}")
    return v


def decision_matrix(m: SvmModel, X: np.ndarray) -> np.ndarray:
    """Per-class decision values for a batch, one row per input row."""
    if X.ndim != 2 or X.shape[1] != m.dim:
        raise DimensionError(f"expected rows of dimension {m.dim}")
    Xs = (X - m.mean) / m.std
    cols = []
    for d in m.decisions:
        if m.kernel.kind == "linear":
            cols.append(Xs @ d.weights + d.bias)
        elif d.support.shape[0] == 0:
            cols.append(np.full(Xs.shape[0], d.bias))
        else:
            cols.append(_kernel_matrix(m.kernel, Xs, d.support) @ d.dual_coef + d.bias)
    return np.stack(cols, axis=1)


def decision_values(m: SvmModel, x) -> np.ndarray:
    return decision_matrix(m, _as_vector(x, m.dim)[None, :])[0]


def predict(m: SvmModel, x) -> int:
    """argmax over decision values; ties go to the lowest class id."""
    return m.class_ids[int(np.argmax(decision_values(m, x)))]


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    misclassification: float
    confusion: np.ndarray
    class_ids: tuple[int, ...]
    total: int = field(default=0)

    def __post_init__(self):
        n = len(self.class_ids)
        if self.confusion.shape != (n, n):
            raise DimensionError("confusion table must be n_classes square")
        self.confusion.setflags(write=False)


def evaluate(m: SvmModel, samples: Sequence[Sample]) -> EvalReport:
    """Accuracy, misclassification rate, and the true-by-predicted
    confusion table over a labeled set."""
    if not samples:
        raise TrainingError("evaluation set is empty")
    X = np.stack([_as_vector(v, m.dim) for v, _ in samples])
    truth = np.asarray([int(c) for _, c in samples], dtype=np.int64)
    pred_pos = np.argmax(decision_matrix(m, X), axis=1)
    ids = np.asarray(m.class_ids, dtype=np.int64)
    predicted = ids[pred_pos]
    pos_of = {cls: i for i, cls in enumerate(m.class_ids)}
    confusion = np.zeros((m.n_classes, m.n_classes), dtype=np.int64)
    for t, q in zip(truth.tolist(), predicted.tolist()):
        if t not in pos_of:
            raise TrainingError(f"test label {t} is not a model class")
        confusion[pos_of[t], pos_of[q]] += 1
    correct = int(np.trace(confusion))
    accuracy = correct / truth.size
    return EvalReport(
        accuracy=accuracy,
        misclassification=1.0 - accuracy,
        confusion=confusion,
        class_ids=m.class_ids,
        total=int(truth.size),
    )
