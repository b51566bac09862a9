"""Reference quantizers to compare against: alternating least-squares on the
integer grid, sign-binary with the optimal scale, and plain linear rounding.

The baselines keep the integer level set Q = {-2^(k-1), ..., 2^(k-1)-1}
used by the methods they stand in for, distinct from the vector-loss
quantizer's half-integer grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantizer import QuantResult
from .tensor import _as_vector


@dataclass(frozen=True)
class BaselineResult(QuantResult):
    """QuantResult plus the alternating-step count and its loss trajectory."""

    iterations: int = 1
    loss_history: tuple[float, ...] = ()


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.floor(np.abs(x) + 0.5) * np.sign(x)


def _finish(w, v, alpha, lam, k, iterations, history) -> BaselineResult:
    w_q = alpha * v
    d = w - w_q
    j_l2 = float(d @ d)
    nw = float(np.sqrt(w @ w))
    nq = float(np.sqrt(w_q @ w_q))
    if nw == 0.0 or nq == 0.0:
        j_o = 0.0 if j_l2 == 0.0 else 1.0
    else:
        j_o = 1.0 - float(np.clip(float(w @ w_q) / (nw * nq), -1.0, 1.0))
    return BaselineResult(
        codes=v,
        bits=int(k),
        lam=float(lam),
        alpha=float(alpha),
        reconstructed=w_q,
        loss_orientation=j_o,
        loss_modulus=j_l2,
        loss_vector=j_o + j_l2,
        loss_l2=j_l2,
        iterations=iterations,
        loss_history=tuple(history),
    )


def iterative_l2(w_f, k: int, max_iters: int = 50, alpha0: float | None = None) -> BaselineResult:
    """Alternating exact coordinate descent on ||w - alpha*v||^2.

    Each iteration assigns v to the nearest integer levels of w/alpha, then
    rescales alpha to the least-squares value for that v. Starts from
    alpha0 = max|w| / (2^(k-1) - 1) unless overridden (the starting point
    selects which local basin the descent lands in). Stops at a fixpoint of
    the assignment or after max_iters iterations.
    """
    w = _as_vector(w_f)
    if k < 2:
        raise ValueError(f"iterative baseline needs k >= 2, got {k}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    lo = -(2.0 ** (k - 1))
    hi = -lo - 1.0
    wmax = float(np.max(np.abs(w)))
    if wmax == 0.0:
        return _finish(w, np.zeros_like(w), 1.0, 1.0, k, 1, [0.0])

    alpha = float(alpha0) if alpha0 is not None else wmax / hi
    if alpha <= 0.0:
        raise ValueError("alpha0 must be positive")
    history = []
    v_prev = None
    iterations = 0
    while iterations < max_iters:
        v = np.clip(_round_half_away(w / alpha), lo, hi)
        if not v.any():
            # over-large scale collapsed every weight to level 0; re-seed
            alpha /= 2.0
            continue
        alpha = float(v @ w) / float(v @ v)
        iterations += 1
        d = w - alpha * v
        history.append(float(d @ d))
        if v_prev is not None and np.array_equal(v, v_prev):
            break
        v_prev = v
    return _finish(w, v, alpha, alpha, k, iterations, history)


def sign_binary(w_f) -> BaselineResult:
    """Binary codes by sign (sign(0) = +1) with alpha = mean(|w|).

    For +-1 codes, mean(|w|) equals the least-squares projection scale
    <v, w>/<v, v>, so no iteration is needed.
    """
    w = _as_vector(w_f)
    v = np.where(w >= 0.0, 1.0, -1.0)
    alpha = float(np.mean(np.abs(w)))
    res = _finish(w, v, alpha, alpha, 1, 1, [])
    return res


def linear_round(w_f, k: int) -> BaselineResult:
    """Fixed-point rounding: scale by max|w|/(2^(k-1)-1) and round.

    An all-zero input keeps alpha = 1 and reconstructs exactly.
    """
    w = _as_vector(w_f)
    if k < 2:
        raise ValueError(f"linear rounding needs k >= 2, got {k}")
    lo = -(2.0 ** (k - 1))
    hi = -lo - 1.0
    wmax = float(np.max(np.abs(w)))
    if wmax == 0.0:
        return _finish(w, np.zeros_like(w), 1.0, 1.0, k, 1, [0.0])
    alpha = wmax / hi
    v = np.clip(_round_half_away(w / alpha), lo, hi)
    return _finish(w, v, alpha, alpha, k, 1, [])
