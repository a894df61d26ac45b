"""Teacher matrices: extraction from any single-item scorer, a built-in
count-based Markov scorer, and the TCH1 file format.

A teacher matrix is row-stochastic: row i is the temperature-softmaxed
score vector some model assigns to "what follows item i". The file
boundary lets externally trained models feed the transition solvers
without linking against this package.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .data import ItemVocab, SessionDataset
from .errors import ConfigError, DataError, FormatError

TEACHER_MAGIC = b"TCH1"
DTYPE_F64 = 0

ROW_SUM_TOL_STRICT = 1e-9
ROW_SUM_TOL_FILE = 1e-6


class TeacherScorer(Protocol):
    def score(self, item_index: int) -> np.ndarray:
        """Length-n logit vector for transitions out of one item."""
        ...


@dataclass
class TeacherMatrix:
    matrix: np.ndarray
    tau: float
    vocab: ItemVocab | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: float = ROW_SUM_TOL_STRICT) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise DataError(f"teacher matrix must be square, got shape {self.matrix.shape}")
        if np.any(self.matrix < 0):
            raise DataError("teacher matrix has negative entries")
        sums = self.matrix.sum(axis=1)
        bad = np.abs(sums - 1.0) > tol
        if bad.any():
            row = int(np.argmax(bad))
            raise DataError(
                f"teacher row {row} sums to {sums[row]:.12g}, outside 1 +/- {tol}"
            )


def softmax_rows(logits: np.ndarray, tau: float) -> np.ndarray:
    """Row-wise temperature softmax with max-subtraction for stability."""
    scaled = (logits - logits.max(axis=-1, keepdims=True)) / tau
    e = np.exp(scaled)
    return e / e.sum(axis=-1, keepdims=True)


def extract_teacher(
    scorer: TeacherScorer, n: int, tau: float, vocab: ItemVocab | None = None
) -> TeacherMatrix:
    """Build the row-stochastic teacher by scoring every single-item
    session and softmaxing at temperature tau."""
    if not tau > 0:
        raise ConfigError(f"tau must be > 0, got {tau}")
    T = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        try:
            logits = np.asarray(scorer.score(i), dtype=np.float64)
        except Exception as exc:
            raise DataError(f"teacher scorer failed for item {i}: {exc}") from exc
        if logits.shape != (n,):
            raise DataError(
                f"teacher scorer returned shape {logits.shape} for item {i}, expected ({n},)"
            )
        if not np.all(np.isfinite(logits)):
            raise DataError(f"teacher scorer produced non-finite logits for item {i}")
        T[i] = softmax_rows(logits, tau)
    return TeacherMatrix(T, tau, vocab)


class MarkovTeacher:
    """Log, smoothed consecutive-pair counts as transition logits.

    score(i)[j] = log(count(i -> j) + smoothing); with temperature-1
    extraction this reproduces the smoothed empirical transition table.
    """

    def __init__(self, counts: np.ndarray, smoothing: float):
        if smoothing < 0:
            raise ConfigError(f"smoothing must be >= 0, got {smoothing}")
        if smoothing == 0 and np.any(counts == 0):
            raise ConfigError(
                "smoothing=0 with unseen transitions would produce infinite logits"
            )
        self.counts = counts
        self.smoothing = smoothing

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    def score(self, item_index: int) -> np.ndarray:
        return np.log(self.counts[item_index] + self.smoothing)


def markov_teacher(train: SessionDataset, smoothing: float = 1.0) -> MarkovTeacher:
    """Count consecutive transitions in the training sessions."""
    if not train.sessions:
        raise DataError("cannot build a Markov teacher from an empty dataset")
    n = len(train.vocab)
    counts = np.zeros((n, n), dtype=np.float64)
    for session in train.sessions:
        for src, dst in zip(session, session[1:]):
            counts[src, dst] += 1.0
    return MarkovTeacher(counts, smoothing)


def uniform_teacher(n: int, tau: float = 1.0) -> TeacherMatrix:
    """Maximum-entropy baseline teacher: every row uniform."""
    return TeacherMatrix(np.full((n, n), 1.0 / n), tau)


def write_teacher(teacher: TeacherMatrix, path: str | Path) -> None:
    """Serialize in the TCH1 layout; the matrix payload round-trips
    bit-exactly."""
    teacher.validate(ROW_SUM_TOL_STRICT)
    n = teacher.n
    with open(path, "wb") as fh:
        fh.write(TEACHER_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(struct.pack("<B", DTYPE_F64))
        fh.write(struct.pack("<d", teacher.tau))
        fh.write(np.ascontiguousarray(teacher.matrix, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", n))


def read_teacher(path: str | Path, vocab: ItemVocab | None = None) -> TeacherMatrix:
    """Read and re-validate a TCH1 file. The vocabulary, when supplied,
    must match the stored dimension."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read teacher file {path}: {exc}") from exc
    if len(blob) < 21:
        raise FormatError(f"teacher file {path} is truncated")
    if blob[:4] != TEACHER_MAGIC:
        raise FormatError(
            f"teacher file {path} has magic {blob[:4]!r}, expected {TEACHER_MAGIC!r}"
        )
    n = struct.unpack_from("<I", blob, 4)[0]
    dtype_flag = blob[8]
    if dtype_flag != DTYPE_F64:
        raise FormatError(f"unsupported teacher dtype flag {dtype_flag}")
    tau = struct.unpack_from("<d", blob, 9)[0]
    payload_end = 17 + 8 * n * n
    if len(blob) != payload_end + 4:
        raise FormatError(
            f"teacher file {path} has {len(blob)} bytes, expected {payload_end + 4} for n={n}"
        )
    checksum = struct.unpack_from("<I", blob, payload_end)[0]
    if checksum != n:
        raise FormatError(f"teacher file {path} record-count check {checksum} != n={n}")
    matrix = np.frombuffer(blob[17:payload_end], dtype="<f8").reshape(n, n).copy()
    if vocab is not None and len(vocab) != n:
        raise DataError(f"teacher dimension {n} does not match vocabulary size {len(vocab)}")
    teacher = TeacherMatrix(matrix, tau, vocab)
    teacher.validate(ROW_SUM_TOL_FILE)
    return teacher
