"""Optimal quantization intervals under a standard-normal prior.

For unit-variance data the orientation loss of the half-integer code grid is
a function of the interval lam and the bitwidth k alone, so the optimal
interval can be solved once per bitwidth and reused as a lookup table. Cell
moments of the standard normal have closed forms (CDF differences and density
differences), which keeps the objective exact and fast.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .kernels import orientation_sweep
from .tensor import _as_vector, stats

# frozen 4-decimal reference values for the solved intervals, k = 1..8;
# k = 1 is a convention (the sign grid's angle does not depend on lam)
REFERENCE_LAMBDA = {
    1: 1.0,
    2: 0.9957,
    3: 0.5860,
    4: 0.3352,
    5: 0.1881,
    6: 0.1041,
    7: 0.0569,
    8: 0.0308,
}

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MAX_CURVE_BITS = 20  # 2^k cells; the analytic loss is meant for small k


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _cell_moments(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell probability mass and first moment for boundaries s_0..s_n.

    s_0 = -inf and s_n = +inf are passed as infinities. Uses
    int_a^b p = Phi(b) - Phi(a) and int_a^b t p dt = p(a) - p(b).
    """
    cdf = np.array([0.0 if v == -np.inf else 1.0 if v == np.inf else _normal_cdf(v) for v in s])
    pdf = np.where(np.isinf(s), 0.0, _INV_SQRT_2PI * np.exp(-0.5 * np.square(s)))
    return cdf[1:] - cdf[:-1], pdf[:-1] - pdf[1:]


def orientation_loss_normal(lam: float, k: int) -> float:
    """Expected orientation loss of the k-bit grid on unit-normal data.

    Expands 1 - <w, codes>/(|w||codes|) over the 2^k assignment cells; the
    data norm term is exactly 1 for the standard normal.
    """
    if lam <= 0.0:
        raise ValueError("non-positive lambda")
    if not 1 <= k <= _MAX_CURVE_BITS:
        raise ValueError(f"bits must be in [1, {_MAX_CURVE_BITS}], got {k}")
    n = 2**k
    i = np.arange(1, n + 1, dtype=np.float64)
    q = (i - n / 2 - 0.5) * lam
    s = np.empty(n + 1)
    s[0] = -np.inf
    s[1:n] = (np.arange(1, n) - n / 2) * lam
    s[n] = np.inf
    mass, first = _cell_moments(s)
    num = float(np.sum(q * first))
    den = math.sqrt(float(np.sum(q * q * mass)))
    return 1.0 - num / den


def golden_section(f, lo: float, hi: float, tol: float = 1e-7) -> float:
    """Derivative-free minimizer of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def solve_lambda(k: int, tol: float = 1e-7) -> float:
    """Minimizer of `orientation_loss_normal` over lam in (0, 4].

    k = 1 returns 1.0 by convention (the loss is constant in lam there);
    k > 8 uses the 6/2^k tail rule.
    """
    if k < 1:
        raise ValueError(f"bits must be >= 1, got {k}")
    if k == 1:
        return 1.0
    if k > 8:
        return 6.0 / 2**k
    return golden_section(lambda lam: orientation_loss_normal(lam, k), 1e-6, 4.0, tol)


@dataclass(frozen=True)
class LambdaTemplate:
    """Read-only map bitwidth -> optimal interval for unit-variance data."""

    entries: dict[int, float]

    def __getitem__(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"bits must be >= 1, got {k}")
        if k in self.entries:
            return self.entries[k]
        if k > 8:
            return 6.0 / 2**k
        raise KeyError(k)

    @classmethod
    def solve(cls, tol: float = 1e-7) -> "LambdaTemplate":
        """Regenerate all entries by 1-D minimization."""
        return cls(entries={k: solve_lambda(k, tol) for k in range(1, 9)})

    @classmethod
    def baked(cls) -> "LambdaTemplate":
        """The frozen reference constants, no solving."""
        return cls(entries=dict(REFERENCE_LAMBDA))

    def to_records(self, k_min: int = 1, k_max: int = 8) -> list[dict]:
        if k_min < 1 or k_max < k_min:
            raise ValueError(f"bad bit range [{k_min}, {k_max}]")
        return [{"k": k, "lambda": self[k]} for k in range(k_min, k_max + 1)]


@functools.lru_cache(maxsize=1)
def default_template() -> LambdaTemplate:
    """Solved-once template shared by the quantizer and the training harness."""
    return LambdaTemplate.solve()


EMPIRICAL_GRID_STEP = 0.001
EMPIRICAL_GRID_MAX = 3.0


def empirical_lambda(w_f, k: int) -> float:
    """Exhaustive-search interval for one concrete vector.

    Normalizes w_f to unit variance, then scans lam over
    {0.001, 0.002, ..., 3.000} for the smallest orientation loss. The result
    is in units of the input's standard deviation, directly comparable to the
    solved template values.
    """
    w = _as_vector(w_f)
    sigma = stats(w).std
    if sigma == 0.0:
        raise ValueError("zero variance")
    grid = np.arange(1, int(round(EMPIRICAL_GRID_MAX / EMPIRICAL_GRID_STEP)) + 1) * EMPIRICAL_GRID_STEP
    losses = orientation_sweep(w / sigma, grid, int(k))
    return float(round(grid[int(np.argmin(losses))], 3))


@dataclass(frozen=True)
class OrientationCurve:
    """Sampled (lam, J_o) pairs for one bitwidth."""

    k: int
    samples: tuple[tuple[float, float], ...]


def curve(k: int, lambda_grid) -> OrientationCurve:
    """Sample `orientation_loss_normal` on a strictly increasing positive grid."""
    grid = [float(x) for x in lambda_grid]
    if not grid:
        raise ValueError("empty grid")
    if grid[0] <= 0.0 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing and positive")
    return OrientationCurve(
        k=int(k),
        samples=tuple((lam, orientation_loss_normal(lam, k)) for lam in grid),
    )
