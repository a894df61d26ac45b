"""Binary persistence for trained item-item models (IIM1 layout).

Layout: magic "IIM1", u32 item count, u8 kind tag, u8 dtype flag
(0 = float64), six little-endian f64 hyperparameters
(lam, xi, alpha, beta, tau, delta_pos), the n*n row-major float64
payload, then a u32 record-count check equal to n. The inference decay
delta_inf is evaluation-side configuration and deliberately not stored.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError
from .solvers import MODEL_KINDS, ItemItemModel, SolverConfig

MODEL_MAGIC = b"IIM1"
DTYPE_F64 = 0

_KIND_TAGS = {kind: tag for tag, kind in enumerate(MODEL_KINDS)}


def write_model(model: ItemItemModel, path: str | Path, delta_pos: float = 1.0) -> None:
    if model.kind not in _KIND_TAGS:
        raise DataError(f"unknown model kind {model.kind!r}")
    cfg = model.config
    n = model.n
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(struct.pack("<B", _KIND_TAGS[model.kind]))
        fh.write(struct.pack("<B", DTYPE_F64))
        fh.write(struct.pack("<6d", cfg.lam, cfg.xi, cfg.alpha, cfg.beta, cfg.tau, delta_pos))
        fh.write(np.ascontiguousarray(model.matrix, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", n))


def read_model(path: str | Path) -> tuple[ItemItemModel, float]:
    """Read a model file; returns the model and the stored delta_pos."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    header = 4 + 4 + 1 + 1 + 48
    if len(blob) < header + 4:
        raise FormatError(f"model file {path} is truncated")
    if blob[:4] != MODEL_MAGIC:
        raise FormatError(f"model file {path} has magic {blob[:4]!r}, expected {MODEL_MAGIC!r}")
    n = struct.unpack_from("<I", blob, 4)[0]
    kind_tag = blob[8]
    if kind_tag >= len(MODEL_KINDS):
        raise FormatError(f"model file {path} has unknown kind tag {kind_tag}")
    if blob[9] != DTYPE_F64:
        raise FormatError(f"model file {path} has unsupported dtype flag {blob[9]}")
    lam, xi, alpha, beta, tau, delta_pos = struct.unpack_from("<6d", blob, 10)
    payload_end = header + 8 * n * n
    if len(blob) != payload_end + 4:
        raise FormatError(
            f"model file {path} has {len(blob)} bytes, expected {payload_end + 4} for n={n}"
        )
    if struct.unpack_from("<I", blob, payload_end)[0] != n:
        raise FormatError(f"model file {path} record-count check failed")
    matrix = np.frombuffer(blob[header:payload_end], dtype="<f8").reshape(n, n).copy()
    config = SolverConfig(lam=lam, xi=xi, alpha=alpha, beta=beta, tau=tau)
    return ItemItemModel(matrix, MODEL_KINDS[kind_tag], config), delta_pos
