"""Probability-density estimation for the quantizer's normal prior.

The quantizer only ever needs the standard deviation (parametric estimation,
one pass, O(1) storage). The kernel-density estimator is retained as a slow
but assumption-free oracle for testing the parametric shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import moments
from .tensor import _as_vector

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class NormalModel:
    """Zero-mean normal fit; sigma is the only parameter."""

    sigma: float

    def pdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive for density evaluation")
        z = t / self.sigma
        out = _INV_SQRT_2PI / self.sigma * np.exp(-0.5 * z * z)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KdeModel:
    """Gaussian-kernel density estimate over raw samples."""

    samples: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        if self.bandwidth <= 0.0:
            raise ValueError("bandwidth must be positive")
        object.__setattr__(self, "samples", _as_vector(self.samples))


def fit_normal(w) -> NormalModel:
    """sigma = sqrt(E(w^2) - E(w)^2), clamped at zero, in a single pass."""
    v = _as_vector(w)
    if v.size < 2:
        raise ValueError(f"need at least 2 samples, got {v.size}")
    s1, s2 = moments(v)
    mean = s1 / v.size
    var = max(s2 / v.size - mean * mean, 0.0)
    return NormalModel(sigma=math.sqrt(var))


def silverman_bandwidth(w) -> float:
    """Rule-of-thumb bandwidth 1.06 * sigma * n^(-1/5)."""
    v = _as_vector(w)
    return 1.06 * fit_normal(v).sigma * v.size ** (-0.2)


def fit_kde(w, bandwidth: float | None = None) -> KdeModel:
    v = _as_vector(w)
    h = silverman_bandwidth(v) if bandwidth is None else float(bandwidth)
    return KdeModel(samples=v, bandwidth=h)


def kde_pdf(m: KdeModel, t):
    """p(t) = (1/nh) sum K((t_i - t)/h) with a standard-normal kernel."""
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    z = (m.samples[None, :] - np.atleast_1d(t)[:, None]) / m.bandwidth
    out = _INV_SQRT_2PI * np.exp(-0.5 * z * z).sum(axis=1) / (m.samples.size * m.bandwidth)
    return float(out[0]) if scalar else out


def standardize(w, m: NormalModel) -> np.ndarray:
    """Element-wise division by sigma; leaves any cosine against a fixed
    vector unchanged, so orientation losses computed on the standardized
    data transfer back to the raw data."""
    v = _as_vector(w)
    if m.sigma == 0.0:
        raise ValueError("sigma is zero")
    return v / m.sigma
