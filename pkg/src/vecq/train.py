"""Quantized-training harness: a small dense MLP whose weights are re-quantized
from shadow full-precision copies on every forward pass, with straight-through
gradients and EMA-tracked activation statistics.

The harness trains on a built-in two-moons task or on an MNIST subset read
from IDX files; either way the run is deterministic under a fixed seed.
"""

from __future__ import annotations

import gzip
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .quantizer import QuantResult, drive, quantize, steer
from .template import LambdaTemplate, default_template
from .tensor import stats


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    dataset: str = "moons"
    weight_bits: int | None = None  # None = full precision
    activation_bits: int | None = None  # None = full precision, else 8
    hidden: tuple[int, ...] | None = None  # default depends on dataset
    epochs: int = 200
    batch_size: int = 64
    lr: float = 0.1
    lr_decay_epochs: tuple[int, ...] = (150,)
    lr_decay: float = 0.1
    seed: int = 0
    ema_momentum: float = 0.9
    moons_samples: int = 800
    moons_noise: float = 0.15
    mnist_dir: str | None = None
    mnist_train_limit: int = 2000
    mnist_test_limit: int = 1000

    def __post_init__(self) -> None:
        if self.dataset not in ("moons", "mnist"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.weight_bits is not None and not 1 <= self.weight_bits <= 8:
            raise ValueError(f"weight_bits must be in [1, 8] or full, got {self.weight_bits}")
        if self.activation_bits not in (None, 8):
            raise ValueError(f"activation_bits must be 8 or full, got {self.activation_bits}")
        if not 0.0 < self.ema_momentum < 1.0:
            raise ValueError("ema_momentum must be in (0, 1)")

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        kwargs = dict(obj)
        for key in ("weight_bits", "activation_bits"):
            if kwargs.get(key) == "full":
                kwargs[key] = None
        for key in ("hidden", "lr_decay_epochs"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def resolved_hidden(self) -> tuple[int, ...]:
        if self.hidden is not None:
            return self.hidden
        return (32, 32) if self.dataset == "moons" else (128, 64)


# ---------------------------------------------------------------------------
# network state
# ---------------------------------------------------------------------------


@dataclass
class LayerState:
    """Shadow full-precision weights plus their current quantized image."""

    w_full: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,), kept full precision
    w_quant: QuantResult | None = None
    act_sigma_ema: float | None = None
    ema_momentum: float = 0.9

    @property
    def shape(self) -> tuple[int, int]:
        return self.w_full.shape


@dataclass
class Network:
    layers: list[LayerState]
    weight_bits: int | None
    activation_bits: int | None
    template: LambdaTemplate
    step: int = 0


@dataclass
class ForwardCache:
    step: int
    inputs: list[np.ndarray] = field(default_factory=list)  # layer inputs as seen forward
    preacts: list[np.ndarray] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)  # weights used forward


def init_network(sizes, rng, config: TrainConfig, template: LambdaTemplate | None = None) -> Network:
    template = template or default_template()
    layers = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        layers.append(
            LayerState(
                w_full=rng.normal(0.0, math.sqrt(2.0 / fan_in), (fan_in, fan_out)),
                bias=np.zeros(fan_out),
                ema_momentum=config.ema_momentum,
            )
        )
    return Network(
        layers=layers,
        weight_bits=config.weight_bits,
        activation_bits=config.activation_bits,
        template=template,
    )


def quantize_activation(a, k_a: int, sigma_ema: float, template: LambdaTemplate | None = None):
    """Apply the steering/driving pipeline to activations, with the EMA
    standard deviation standing in for the batch statistic."""
    if sigma_ema <= 0.0:
        raise ValueError("sigma_ema must be positive")
    template = template or default_template()
    arr = np.asarray(a, dtype=np.float64)
    flat = arr.ravel()
    codes = steer(flat, template[k_a] * sigma_ema, k_a)
    _, rec = drive(flat, codes)
    return rec.reshape(arr.shape)


def forward(net: Network, batch, training: bool = False) -> tuple[np.ndarray, ForwardCache]:
    """Quantize weights, run the MLP, optionally quantize hidden activations.

    Hidden layers use ReLU; the final layer emits raw logits (the softmax
    lives in the loss). Training mode folds each batch's activation standard
    deviation into the per-layer EMA before quantizing with it.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.layers[0].shape[0]:
        raise ValueError(f"batch shape {x.shape} does not match input dim {net.layers[0].shape[0]}")
    cache = ForwardCache(step=net.step)
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        if net.weight_bits is None:
            w_used = layer.w_full
        else:
            layer.w_quant = quantize(layer.w_full.ravel(), net.weight_bits, net.template)
            w_used = layer.w_quant.reconstructed.reshape(layer.shape)
        z = x @ w_used + layer.bias
        cache.inputs.append(x)
        cache.preacts.append(z)
        cache.weights.append(w_used)
        if i == last:
            x = z
            continue
        a = np.maximum(z, 0.0)
        if net.activation_bits is not None:
            sigma_batch = stats(a.ravel()).std if a.any() else 0.0
            if training:
                m = layer.ema_momentum
                if layer.act_sigma_ema is None:
                    layer.act_sigma_ema = sigma_batch
                else:
                    layer.act_sigma_ema = m * layer.act_sigma_ema + (1.0 - m) * sigma_batch
            sigma = layer.act_sigma_ema if layer.act_sigma_ema is not None else sigma_batch
            if sigma > 0.0:
                a = quantize_activation(a, net.activation_bits, sigma, net.template)
        x = a
    return x, cache


def backward_and_update(net: Network, cache: ForwardCache, grads_out, lr: float) -> Network:
    """Backprop through the weights used forward (straight-through for both
    quantizers) and apply the updates to the shadow full-precision weights."""
    if cache.step != net.step:
        raise ValueError("stale cache: network was updated since this forward pass")
    dz = np.asarray(grads_out, dtype=np.float64)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        g_w = cache.inputs[i].T @ dz
        g_b = dz.sum(axis=0)
        if i > 0:
            dx = dz @ cache.weights[i].T
            dz = dx * (cache.preacts[i - 1] > 0.0)
        layer.w_full = layer.w_full - lr * g_w
        layer.bias = layer.bias - lr * g_b
    net.step += 1
    return net


def softmax_cross_entropy(logits, labels) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient w.r.t. the logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)
    n = len(labels)
    loss = -float(np.mean(np.log(p[np.arange(n), labels] + 1e-300)))
    grad = p.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def accuracy(logits, labels) -> float:
    return float(np.mean(np.argmax(logits, axis=1) == labels))


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------


def make_moons(n_samples: int, noise: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Two interleaved half-circles with Gaussian jitter, shuffled."""
    half = n_samples // 2
    t = np.linspace(0.0, math.pi, half)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    x = np.vstack([outer, inner]) + rng.normal(0.0, noise, (2 * half, 2))
    y = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
    order = rng.permutation(len(y))
    return x[order], y[order]


class IdxError(Exception):
    """Malformed IDX dataset file."""


def _read_idx(path, magic: int, ndim: int) -> np.ndarray:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        head = fh.read(4 + 4 * ndim)
        if len(head) < 4 + 4 * ndim:
            raise IdxError(f"truncated IDX header in {path}")
        got = struct.unpack(">I", head[:4])[0]
        if got != magic:
            raise IdxError(f"bad IDX magic in {path}: 0x{got:08x}, expected 0x{magic:08x}")
        dims = struct.unpack(f">{ndim}I", head[4:])
        count = math.prod(dims)
        raw = fh.read(count)
        if len(raw) < count:
            raise IdxError(f"truncated IDX payload in {path}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(dims)


def load_idx_images(path) -> np.ndarray:
    """(n, rows*cols) float64 in [0, 1] from an idx3-ubyte file (magic 0x803)."""
    data = _read_idx(path, 0x00000803, 3)
    return data.reshape(data.shape[0], -1).astype(np.float64) / 255.0


def load_idx_labels(path) -> np.ndarray:
    """(n,) int64 labels from an idx1-ubyte file (magic 0x801)."""
    return _read_idx(path, 0x00000801, 1).astype(np.int64)


def _find_idx(directory: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        p = directory / name
        if p.exists():
            return p
    raise IdxError(f"missing IDX file {stem}[.gz] in {directory}")


def _load_dataset(config: TrainConfig, rng):
    if config.dataset == "moons":
        x, y = make_moons(config.moons_samples * 2, config.moons_noise, rng)
        n = config.moons_samples
        return x[:n], y[:n], x[n:], y[n:], 2
    if config.mnist_dir is None:
        raise IdxError("mnist dataset requested but mnist_dir is not set")
    d = Path(config.mnist_dir)
    xtr = load_idx_images(_find_idx(d, "train-images-idx3-ubyte"))
    ytr = load_idx_labels(_find_idx(d, "train-labels-idx1-ubyte"))
    xte = load_idx_images(_find_idx(d, "t10k-images-idx3-ubyte"))
    yte = load_idx_labels(_find_idx(d, "t10k-labels-idx1-ubyte"))
    ntr = min(config.mnist_train_limit, len(ytr))
    nte = min(config.mnist_test_limit, len(yte))
    return xtr[:ntr], ytr[:ntr], xte[:nte], yte[:nte], 10


# ---------------------------------------------------------------------------
# the demo loop
# ---------------------------------------------------------------------------


def train_demo(config: TrainConfig, metrics_path=None) -> dict:
    """Train the configured MLP and report per-epoch accuracy and loss.

    Returns a dict with the final metrics and the per-epoch records; when
    metrics_path is given the records are also written as JSON lines.
    """
    rng = np.random.default_rng(config.seed)
    xtr, ytr, xte, yte, n_classes = _load_dataset(config, rng)
    sizes = [xtr.shape[1], *config.resolved_hidden(), n_classes]
    net = init_network(sizes, rng, config)

    records = []
    lr = config.lr
    for epoch in range(config.epochs):
        if epoch in config.lr_decay_epochs:
            lr *= config.lr_decay
        order = rng.permutation(len(ytr))
        for start in range(0, len(ytr), config.batch_size):
            idx = order[start : start + config.batch_size]
            logits, cache = forward(net, xtr[idx], training=True)
            _, grad = softmax_cross_entropy(logits, ytr[idx])
            backward_and_update(net, cache, grad, lr)
        for split, x, y in (("train", xtr, ytr), ("test", xte, yte)):
            logits, _ = forward(net, x)
            loss, _ = softmax_cross_entropy(logits, y)
            records.append(
                {"epoch": epoch, "split": split, "accuracy": accuracy(logits, y), "loss": loss}
            )

    if metrics_path is not None:
        with open(metrics_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    final = {rec["split"]: rec for rec in records[-2:]}
    return {
        "dataset": config.dataset,
        "weight_bits": config.weight_bits,
        "activation_bits": config.activation_bits,
        "epochs": config.epochs,
        "seed": config.seed,
        "final": {split: {"accuracy": r["accuracy"], "loss": r["loss"]} for split, r in final.items()},
        "records": records,
    }
