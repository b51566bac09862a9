"""Dense float64 tensor container and the vector statistics the quantizer needs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import moments


@dataclass(frozen=True)
class Tensor:
    """Row-major dense array: a flat float64 buffer plus a shape."""

    data: np.ndarray
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        shape = tuple(int(s) for s in self.shape)
        if not shape:
            raise ValueError("empty input")
        if any(s <= 0 for s in shape):
            raise ValueError(f"non-positive extent in shape {shape}")
        if int(np.prod(shape)) != data.size:
            raise ValueError(f"shape {shape} does not match {data.size} elements")
        if not np.all(np.isfinite(data)):
            raise ValueError("non-finite values in tensor")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def from_array(cls, arr) -> "Tensor":
        a = np.asarray(arr, dtype=np.float64)
        if a.size == 0:
            raise ValueError("empty input")
        return cls(a.ravel(), a.shape if a.ndim else (1,))

    @property
    def size(self) -> int:
        return self.data.size

    def reshaped(self) -> np.ndarray:
        """The buffer viewed at its declared shape."""
        return self.data.reshape(self.shape)


@dataclass(frozen=True)
class SampleStats:
    mean: float
    variance: float  # population (divide by n)
    count: int

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def flatten(t: Tensor) -> np.ndarray:
    """Row-major 1-D copy of the tensor contents."""
    if t.size == 0:
        raise ValueError("empty input")
    return t.data.copy()


def unflatten(v, shape) -> Tensor:
    """Inverse of `flatten` for the original shape."""
    return Tensor(np.asarray(v, dtype=np.float64), tuple(shape))


def stats(v) -> SampleStats:
    """Mean and population variance in a single pass."""
    w = _as_vector(v)
    s1, s2 = moments(w)
    n = w.size
    mean = s1 / n
    # clamp: round-off can push E(w^2) - E(w)^2 fractionally below zero
    variance = max(s2 / n - mean * mean, 0.0)
    return SampleStats(mean=mean, variance=variance, count=n)


def dot(a, b) -> float:
    x, y = _as_pair(a, b)
    return float(x @ y)


def norm(a) -> float:
    x = _as_vector(a)
    return float(np.sqrt(x @ x))


def cosine(a, b) -> float:
    """Cosine of the angle between two vectors, clamped into [-1, 1]."""
    x, y = _as_pair(a, b)
    nx = float(np.sqrt(x @ x))
    ny = float(np.sqrt(y @ y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("zero norm")
    return float(np.clip(float(x @ y) / (nx * ny), -1.0, 1.0))


def _as_vector(v) -> np.ndarray:
    w = np.ascontiguousarray(v, dtype=np.float64).ravel()
    if w.size == 0:
        raise ValueError("empty input")
    return w


def _as_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    x = _as_vector(a)
    y = _as_vector(b)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return x, y
