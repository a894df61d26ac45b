"""TCH1 teacher-file writer (and a reader for round-trip checks).

Layout: magic "TCH1", little-endian u32 n, u8 dtype flag (0 = float64),
f64 temperature, n*n row-major little-endian float64, u32 record count
equal to n.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .model import ToyNeuralModel

MAGIC = b"TCH1"
DTYPE_F64 = 0


def softmax_rows(logits: np.ndarray, tau: float) -> np.ndarray:
    scaled = (logits - logits.max(axis=1, keepdims=True)) / tau
    e = np.exp(scaled)
    return e / e.sum(axis=1, keepdims=True)


def write_teacher_file(matrix: np.ndarray, tau: float, path: str | Path) -> None:
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"teacher matrix must be square, got {matrix.shape}")
    sums = matrix.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9) or np.any(matrix < 0):
        raise ValueError("teacher rows must be nonnegative and sum to 1")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(struct.pack("<B", DTYPE_F64))
        fh.write(struct.pack("<d", tau))
        fh.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", n))


def read_teacher_file(path: str | Path) -> tuple[np.ndarray, float]:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise ValueError(f"bad magic in {path}: {blob[:4]!r}")
    n = struct.unpack_from("<I", blob, 4)[0]
    if blob[8] != DTYPE_F64:
        raise ValueError(f"unsupported dtype flag {blob[8]}")
    tau = struct.unpack_from("<d", blob, 9)[0]
    end = 17 + 8 * n * n
    if len(blob) != end + 4 or struct.unpack_from("<I", blob, end)[0] != n:
        raise ValueError(f"corrupt teacher file {path}")
    return np.frombuffer(blob[17:end], dtype="<f8").reshape(n, n).copy(), tau


def export_teacher(model: ToyNeuralModel, tau: float, out_path: str | Path) -> np.ndarray:
    """Score every single-item session, softmax at tau, write TCH1."""
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    logits = model.single_item_logits().detach().cpu().numpy().astype(np.float64)
    if not np.all(np.isfinite(logits)):
        bad = int(np.argwhere(~np.isfinite(logits).all(axis=1))[0][0])
        raise ValueError(f"non-finite logits for item {bad}")
    matrix = softmax_rows(logits, tau)
    write_teacher_file(matrix, tau, out_path)
    return matrix
