"""Vector-loss quantizer core: steering, driving, and the composed operator.

Quantization happens in two decoupled stages. Steering picks a code vector on
the half-integer grid {-2^(k-1)+0.5, ..., -0.5, 0.5, ..., 2^(k-1)-0.5} that
minimizes the orientation loss 1 - cos(w, codes); driving then scales the
chosen codes by the closed-form least-squares factor alpha, which minimizes
the modulus loss for that orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import steer_codes
from .tensor import _as_pair, _as_vector, stats

MAX_BITS = 30


@dataclass(frozen=True)
class QuantResult:
    """Outcome of quantizing one weight vector."""

    codes: np.ndarray  # half-integer code levels
    bits: int
    lam: float  # interval between adjacent levels, in w units
    alpha: float  # least-squares scale
    reconstructed: np.ndarray  # alpha * codes
    loss_orientation: float  # 1 - cos(w, reconstructed)
    loss_modulus: float  # ||w - reconstructed||^2
    loss_vector: float  # orientation + modulus
    loss_l2: float  # ||w - reconstructed||^2


def orientation_loss(w_f, w_q) -> float:
    """1 - cosine(w_f, w_q); scale-invariant in both arguments."""
    a, b = _as_pair(w_f, w_q)
    na = float(np.sqrt(a @ a))
    nb = float(np.sqrt(b @ b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero norm")
    return 1.0 - float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


def modulus_loss(w_f, w_q) -> float:
    """Squared Euclidean distance between the vectors."""
    a, b = _as_pair(w_f, w_q)
    d = a - b
    return float(d @ d)


def steer(w_f, lam: float, k: int) -> np.ndarray:
    """Assign each weight to the half-integer grid with interval lam.

    Per element: round(w/lam - 0.5) half-away-from-zero, clipped into
    [-2^(k-1), 2^(k-1)-1], plus 0.5. At most 2^k distinct output values.
    """
    if lam <= 0.0:
        raise ValueError("non-positive lambda")
    if not 1 <= k <= MAX_BITS:
        raise ValueError(f"bits must be in [1, {MAX_BITS}], got {k}")
    return steer_codes(_as_vector(w_f), float(lam), int(k))


def drive(w_f, codes) -> tuple[float, np.ndarray]:
    """Scale fixed codes by the least-squares alpha.

    alpha = <codes, w>/<codes, codes>, making w_q = alpha*codes the orthogonal
    projection of w onto span(codes): <w - w_q, codes> = 0.
    """
    w, c = _as_pair(w_f, codes)
    cc = float(c @ c)
    # the half-integer grid contains no zero level, so cc > 0 always
    assert cc > 0.0, "degenerate all-zero code vector"
    alpha = float(c @ w) / cc
    return alpha, alpha * c


def quantize(w_f, k: int, template=None) -> QuantResult:
    """steer into k bits at lam = template[k] * sigma, then drive.

    The template interval is solved for unit-variance data, so the working
    interval rescales by the sample standard deviation of w_f. A
    zero-variance input (all elements equal) falls back to sign codes, which
    reconstruct it exactly.
    """
    w = _as_vector(w_f)
    if not 1 <= k <= MAX_BITS:
        raise ValueError(f"bits must be in [1, {MAX_BITS}], got {k}")
    if template is None:
        from .template import default_template

        template = default_template()
    sigma = stats(w).std
    if sigma == 0.0:
        return _degenerate_constant(w, k)
    lam = template[k] * sigma
    return _assemble(w, steer_codes(w, lam, k), lam, k)


def quantize_fixed_lambda(w_f, k: int, lam: float) -> QuantResult:
    """Like `quantize` but with a caller-supplied interval, already in w units."""
    w = _as_vector(w_f)
    if not 1 <= k <= MAX_BITS:
        raise ValueError(f"bits must be in [1, {MAX_BITS}], got {k}")
    if lam <= 0.0:
        raise ValueError("non-positive lambda")
    return _assemble(w, steer_codes(w, float(lam), k), float(lam), k)


def _degenerate_constant(w: np.ndarray, k: int) -> QuantResult:
    # sigma == 0: sign codes +-0.5 and the driven alpha reproduce w exactly
    codes = np.where(w >= 0.0, 0.5, -0.5)
    return _assemble(w, codes, 1.0, k)


def _assemble(w: np.ndarray, codes: np.ndarray, lam: float, k: int) -> QuantResult:
    alpha, w_q = drive(w, codes)
    d = w - w_q
    j_l2 = float(d @ d)
    nw = float(np.sqrt(w @ w))
    nq = float(np.sqrt(w_q @ w_q))
    if nw == 0.0 or nq == 0.0:
        # only reachable through zero inputs; exact reconstruction means zero loss
        j_o = 0.0 if j_l2 == 0.0 else 1.0
    else:
        j_o = 1.0 - float(np.clip(float(w @ w_q) / (nw * nq), -1.0, 1.0))
    return QuantResult(
        codes=codes,
        bits=int(k),
        lam=float(lam),
        alpha=alpha,
        reconstructed=w_q,
        loss_orientation=j_o,
        loss_modulus=j_l2,
        loss_vector=j_o + j_l2,
        loss_l2=j_l2,
    )
