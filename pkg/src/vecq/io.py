"""Bit-exact tensor container and quantization report serialization.

TensorFile layout (all integers little-endian):

    magic    4 bytes  "VQT1"
    dtype    u8       0 = f32, 1 = f64
    rank     u8
    shape    rank x u32
    payload  row-major raw values
    crc      u32      CRC32 of every preceding byte (header + payload)
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .quantizer import QuantResult
from .tensor import Tensor

MAGIC = b"VQT1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {"f32": 0, "f64": 1}


class TensorFileError(Exception):
    """Base class for container-format failures."""


class BadMagicError(TensorFileError):
    pass


class CrcMismatchError(TensorFileError):
    pass


class TruncatedPayloadError(TensorFileError):
    pass


def write_tensor(path, t: Tensor, dtype: str = "f32") -> None:
    """Serialize a tensor; f64 in-memory values narrow to f32 by default
    (IEEE round-to-nearest-even)."""
    if dtype not in _DTYPE_CODES:
        raise ValueError(f"unsupported dtype {dtype!r} (expected 'f32' or 'f64')")
    code = _DTYPE_CODES[dtype]
    header = struct.pack("<4sBB", MAGIC, code, len(t.shape))
    header += struct.pack(f"<{len(t.shape)}I", *t.shape)
    payload = np.ascontiguousarray(t.data, dtype=_DTYPES[code]).tobytes()
    body = header + payload
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def read_tensor(path) -> Tensor:
    """Parse and validate a TensorFile; values come back as float64."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"bad magic in {path}")
    if len(raw) < 6:
        raise TruncatedPayloadError(f"truncated header in {path}")
    code, rank = raw[4], raw[5]
    if code not in _DTYPES:
        raise TensorFileError(f"unknown dtype code {code} in {path}")
    header_len = 6 + 4 * rank
    if len(raw) < header_len:
        raise TruncatedPayloadError(f"truncated shape in {path}")
    shape = struct.unpack(f"<{rank}I", raw[6:header_len])
    count = math.prod(shape) if shape else 0
    expected = header_len + count * _DTYPES[code].itemsize + 4
    if len(raw) < expected:
        raise TruncatedPayloadError(
            f"truncated payload in {path}: {len(raw)} bytes, expected {expected}"
        )
    if len(raw) > expected:
        raise TensorFileError(f"trailing bytes in {path}")
    (crc,) = struct.unpack("<I", raw[expected - 4 : expected])
    if zlib.crc32(raw[: expected - 4]) != crc:
        raise CrcMismatchError(f"CRC mismatch in {path}")
    values = np.frombuffer(raw[header_len : expected - 4], dtype=_DTYPES[code])
    return Tensor(values.astype(np.float64), shape)


# ---------------------------------------------------------------------------
# quantization reports
# ---------------------------------------------------------------------------

CODE_OVERHEAD_BYTES = 8  # 32-bit alpha + 32-bit lambda stored alongside codes


@dataclass(frozen=True)
class LayerRecord:
    name: str
    k: int
    lam: float
    alpha: float
    loss_orientation: float
    loss_modulus: float
    loss_vector: float
    loss_l2: float
    original_bytes: int
    quantized_bytes: int
    compression_ratio: float


@dataclass(frozen=True)
class QuantReport:
    layers: tuple[LayerRecord, ...] = ()


def quantized_size(element_count: int, k: int) -> int:
    """ceil(d*k/8) packed code bytes plus the per-layer scale overhead."""
    return (element_count * k + 7) // 8 + CODE_OVERHEAD_BYTES


def layer_record(name: str, result: QuantResult, source_bytes_per_elem: int = 4) -> LayerRecord:
    d = result.codes.size
    original = d * source_bytes_per_elem
    quantized = quantized_size(d, result.bits)
    return LayerRecord(
        name=name,
        k=result.bits,
        lam=result.lam,
        alpha=result.alpha,
        loss_orientation=result.loss_orientation,
        loss_modulus=result.loss_modulus,
        loss_vector=result.loss_vector,
        loss_l2=result.loss_l2,
        original_bytes=original,
        quantized_bytes=quantized,
        compression_ratio=original / quantized,
    )


_JSON_KEYS = {
    "lam": "lambda",
    "loss_orientation": "J_o",
    "loss_modulus": "J_m",
    "loss_vector": "J_v",
    "loss_l2": "J_l2",
}
_FIELD_KEYS = {v: k for k, v in _JSON_KEYS.items()}


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def report_to_json(report: QuantReport) -> str:
    """Canonical form: sorted keys, compact separators, 6 significant digits."""
    layers = []
    for rec in report.layers:
        row = {}
        for field, value in asdict(rec).items():
            key = _JSON_KEYS.get(field, field)
            row[key] = _sig6(value) if isinstance(value, float) else value
        layers.append(row)
    return json.dumps({"layers": layers}, sort_keys=True, separators=(",", ":"))


def write_report(path, report: QuantReport) -> None:
    Path(path).write_text(report_to_json(report) + "\n")


def read_report(path) -> QuantReport:
    obj = json.loads(Path(path).read_text())
    layers = []
    for row in obj["layers"]:
        kwargs = {_FIELD_KEYS.get(key, key): value for key, value in row.items()}
        layers.append(LayerRecord(**kwargs))
    return QuantReport(layers=tuple(layers))
