"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

The backend is chosen once at import time from the ``VECQ_BACKEND``
environment variable ("numba" or "numpy"); the default is numba when it is
importable, numpy otherwise. ``VECQ_THREADS`` caps numba's thread count.
`set_backend` allows switching at runtime (used by tests and benchmarks).
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _round_half_away_numpy(x: np.ndarray) -> np.ndarray:
    # np.round ties to even; the code grid needs ties away from zero
    return np.floor(np.abs(x) + 0.5) * np.sign(x)


def _steer_numpy(w: np.ndarray, lam: float, k: int) -> np.ndarray:
    lo = -(2.0 ** (k - 1))
    hi = -lo - 1.0
    r = _round_half_away_numpy(w / lam - 0.5)
    return np.clip(r, lo, hi) + 0.5


def _sweep_numpy(w: np.ndarray, grid: np.ndarray, k: int) -> np.ndarray:
    wn = math.sqrt(float(w @ w))
    out = np.empty(grid.shape[0])
    for gi in range(grid.shape[0]):
        c = _steer_numpy(w, float(grid[gi]), k)
        out[gi] = 1.0 - float(w @ c) / (wn * math.sqrt(float(c @ c)))
    return out


def _moments_numpy(w: np.ndarray) -> tuple[float, float]:
    return float(np.sum(w)), float(w @ w)


# ---------------------------------------------------------------------------
# numba implementations (same arithmetic, fused loops)
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _steer_numba(w, lam, k):
        lo = -(2.0 ** (k - 1))
        hi = -lo - 1.0
        out = np.empty(w.shape[0])
        for j in range(w.shape[0]):
            x = w[j] / lam - 0.5
            ax = math.floor(abs(x) + 0.5)
            r = ax if x >= 0.0 else -ax
            if r < lo:
                r = lo
            elif r > hi:
                r = hi
            out[j] = r + 0.5
        return out

    @njit(parallel=True, fastmath=True, cache=True)
    def _sweep_numba(w, grid, k):
        lo = -(2.0 ** (k - 1))
        hi = -lo - 1.0
        wn = 0.0
        for j in range(w.shape[0]):
            wn += w[j] * w[j]
        wn = math.sqrt(wn)
        out = np.empty(grid.shape[0])
        for gi in prange(grid.shape[0]):
            lam = grid[gi]
            dwc = 0.0
            cc = 0.0
            for j in range(w.shape[0]):
                x = w[j] / lam - 0.5
                ax = math.floor(abs(x) + 0.5)
                r = ax if x >= 0.0 else -ax
                if r < lo:
                    r = lo
                elif r > hi:
                    r = hi
                c = r + 0.5
                dwc += w[j] * c
                cc += c * c
            out[gi] = 1.0 - dwc / (wn * math.sqrt(cc))
        return out

    @njit(cache=True)
    def _moments_numba(w):
        # single pass, O(1) auxiliary storage
        s1 = 0.0
        s2 = 0.0
        for j in range(w.shape[0]):
            s1 += w[j]
            s2 += w[j] * w[j]
        return s1, s2


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------


def _resolve_backend() -> str:
    req = os.environ.get("VECQ_BACKEND", "").strip().lower()
    if req == "numpy":
        return "numpy"
    if req == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("VECQ_BACKEND=numba but numba is not installed")
        return "numba"
    if req:
        raise RuntimeError(f"unknown VECQ_BACKEND {req!r} (expected 'numba' or 'numpy')")
    return "numba" if HAS_NUMBA else "numpy"


def _apply_thread_cap() -> None:
    raw = os.environ.get("VECQ_THREADS", "").strip()
    if not raw or not HAS_NUMBA:
        return
    try:
        n = int(raw)
    except ValueError:
        return
    if n >= 1:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


_BACKEND = _resolve_backend()
_apply_thread_cap()


def active_backend() -> str:
    """Name of the backend currently dispatching the hot kernels."""
    return _BACKEND


def set_backend(name: str) -> None:
    """Switch kernels between "numba" and "numpy" at runtime."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _BACKEND = name


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------


def steer_codes(w: np.ndarray, lam: float, k: int) -> np.ndarray:
    """Half-integer code assignment: clip(round(w/lam - 0.5)) + 0.5."""
    if _BACKEND == "numba":
        return _steer_numba(w, lam, k)
    return _steer_numpy(w, lam, k)


def orientation_sweep(w: np.ndarray, grid: np.ndarray, k: int) -> np.ndarray:
    """Orientation loss 1 - cos(w, steer(w, lam, k)) for every lam in grid."""
    if _BACKEND == "numba":
        return _sweep_numba(w, grid, k)
    return _sweep_numpy(w, grid, k)


def moments(w: np.ndarray) -> tuple[float, float]:
    """(sum(w), sum(w^2)) in one pass; backs the mean/variance estimators."""
    if _BACKEND == "numba":
        return _moments_numba(w)
    return _moments_numpy(w)
