"""Noise reduction and global binarization.

The denoiser is the classical local mean/variance adaptive (Wiener-style)
estimator; the threshold is the Isodata class-mean iteration.  Binarization
is dark-is-ink: intensities at or below the threshold become foreground.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError
from .image import BinaryImage, GrayImage, pack

_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class DenoiseParams:
    """Window is the odd side of the local neighborhood; noise variance is
    estimated as the mean of all local variances when not supplied."""

    window: int = 3
    noise_variance: Optional[float] = None

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ParameterError(f"window must be odd and >= 3, got {self.window}")
        if self.noise_variance is not None and self.noise_variance < 0:
            raise ParameterError("noise variance must be non-negative")


@dataclass(frozen=True)
class Threshold:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 255.0:
            raise ParameterError(f"threshold {self.value} outside [0, 255]")


def _box_mean(padded: np.ndarray, w: int) -> np.ndarray:
    """Mean over w x w windows of a pre-padded array (valid region only)."""
    ii = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.float64)
    ii[1:, 1:] = padded.cumsum(0).cumsum(1)
    s = ii[w:, w:] - ii[:-w, w:] - ii[w:, :-w] + ii[:-w, :-w]
    return s / (w * w)


def adaptive_denoise(img: GrayImage, params: DenoiseParams) -> GrayImage:
    """Local mean/variance adaptive filter.

    Each output pixel is mu + gain * (x - mu) with
    gain = max(sigma^2 - nv, 0) / max(sigma^2, nv, eps), where mu and
    sigma^2 are the window mean and variance (mirror-padded borders) and
    nv is the noise variance.  Output is clamped to [0, 255].
    """
    w = params.window
    r = w // 2
    x = img.pixels.astype(np.float64)
    xp = np.pad(x, r, mode="symmetric")
    mu = _box_mean(xp, w)
    var = np.maximum(_box_mean(xp * xp, w) - mu * mu, 0.0)
    nv = params.noise_variance if params.noise_variance is not None else float(var.mean())
    gain = np.maximum(var - nv, 0.0) / np.maximum(np.maximum(var, nv), _VAR_FLOOR)
    out = mu + gain * (x - mu)
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return GrayImage(width=img.width, height=img.height, pixels=out)


def isodata_threshold(img: GrayImage) -> Threshold:
    """Iterate T <- (mean below + mean above) / 2 from the global mean.

    Stops when the update moves T by at most 0.5 gray levels (the returned
    T then satisfies the fixed-point condition within 0.5), when either
    intensity class empties, or after 100 iterations.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    csum = hist.cumsum()
    cwsum = (hist * np.arange(256)).cumsum()
    total_n = csum[-1]
    total_s = cwsum[-1]

    t = float(img.pixels.mean())
    for _ in range(100):
        k = min(int(np.floor(t)), 255)
        n_lo = csum[k]
        n_hi = total_n - n_lo
        if n_lo == 0 or n_hi == 0:
            return Threshold(t)
        t_next = (cwsum[k] / n_lo + (total_s - cwsum[k]) / n_hi) / 2.0
        if abs(t_next - t) <= 0.5:
            return Threshold(t)
        t = t_next
    return Threshold(t)


def binarize(img: GrayImage, t: Threshold) -> BinaryImage:
    """Intensities <= t become foreground (ink is dark)."""
    return pack(img.pixels <= t.value)
