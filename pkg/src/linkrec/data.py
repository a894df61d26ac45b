"""Interaction-log ingestion, filtering, chronological splitting, and
sparse session-matrix construction.

An interaction log is delimiter-separated text with one interaction per
line: ``session_id, item_id, timestamp``. Timestamps are integers; only
their ordering matters. Ties are broken by input-file order so rebuilds
are deterministic.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError, EmptyDatasetError

DEFAULT_MIN_ITEM_FREQ = 5
DEFAULT_MIN_SESSION_LEN = 2
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


@dataclass(frozen=True)
class LogFormat:
    """Layout of a delimiter-separated interaction log."""

    delimiter: str = ","
    has_header: bool = False


@dataclass(frozen=True)
class Interaction:
    session_id: str
    item_id: str
    timestamp: int


@dataclass
class IngestResult:
    """Parsed interactions plus a count of skipped malformed rows."""

    interactions: list[Interaction]
    malformed: int = 0


class ItemVocab:
    """Bijection between item tokens and dense column indices 0..n-1."""

    def __init__(self, tokens: Sequence[str]):
        self.index_to_token: list[str] = list(tokens)
        self.token_to_index: dict[str, int] = {
            tok: i for i, tok in enumerate(self.index_to_token)
        }
        if len(self.token_to_index) != len(self.index_to_token):
            raise DataError("vocabulary contains duplicate item tokens")

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def get(self, token: str) -> int | None:
        return self.token_to_index.get(token)

    def token(self, index: int) -> str:
        return self.index_to_token[index]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok in self.index_to_token:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ItemVocab":
        with open(path, "r", encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        while tokens and tokens[-1] == "":
            tokens.pop()
        if not tokens:
            raise DataError(f"vocabulary file is empty: {path}")
        return cls(tokens)


@dataclass
class SessionDataset:
    """Sessions as item-index sequences over a shared vocabulary.

    ``session_ids`` and ``timestamps`` parallel ``sessions`` when the
    dataset came from an interaction log; hand-built datasets may leave
    them unset.
    """

    sessions: list[list[int]]
    split_tag: str
    vocab: ItemVocab
    session_ids: list[str] | None = None
    timestamps: list[list[int]] | None = None

    def __len__(self) -> int:
        return len(self.sessions)


def ingest_sessions(path: str | Path, fmt: LogFormat = LogFormat()) -> IngestResult:
    """Parse an interaction log in file order.

    Rows missing a column or carrying a non-integer timestamp are counted
    as malformed and skipped; an unreadable file is fatal.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read interaction log {path}: {exc}") from exc

    interactions: list[Interaction] = []
    malformed = 0
    with fh:
        reader = csv.reader(fh, delimiter=fmt.delimiter)
        for row_no, row in enumerate(reader):
            if fmt.has_header and row_no == 0:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # blank line, not an interaction
            if len(row) < 3:
                malformed += 1
                continue
            session_id, item_id, ts_text = row[0], row[1], row[2]
            try:
                timestamp = int(ts_text)
            except ValueError:
                malformed += 1
                continue
            if not session_id or not item_id:
                malformed += 1
                continue
            interactions.append(Interaction(session_id, item_id, timestamp))
    return IngestResult(interactions, malformed)


@dataclass
class _RawSession:
    session_id: str
    items: list[str]
    times: list[int]
    first_seen: int  # file position of the session's first interaction

    @property
    def last_time(self) -> int:
        return self.times[-1]


def _group_sessions(interactions: Iterable[Interaction]) -> list[_RawSession]:
    """Group interactions by session id, ordering each session by
    (timestamp, input order)."""
    buckets: dict[str, list[tuple[int, int, str]]] = {}
    first_seen: dict[str, int] = {}
    for pos, it in enumerate(interactions):
        buckets.setdefault(it.session_id, []).append((it.timestamp, pos, it.item_id))
        first_seen.setdefault(it.session_id, pos)
    raw = []
    for sid, events in buckets.items():
        events.sort(key=lambda e: (e[0], e[1]))
        raw.append(
            _RawSession(
                session_id=sid,
                items=[e[2] for e in events],
                times=[e[0] for e in events],
                first_seen=first_seen[sid],
            )
        )
    raw.sort(key=lambda s: s.first_seen)
    return raw


@dataclass
class FilterStats:
    """Bookkeeping from filter_and_split, for CLI reporting."""

    raw_interactions: int = 0
    raw_sessions: int = 0
    removed_items: int = 0
    dropped_short_sessions: int = 0
    split_sizes: tuple[int, int, int] = (0, 0, 0)
    eval_sessions_dropped: int = 0


def filter_and_split(
    interactions: Sequence[Interaction],
    min_item_freq: int = DEFAULT_MIN_ITEM_FREQ,
    min_session_len: int = DEFAULT_MIN_SESSION_LEN,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    stats: FilterStats | None = None,
) -> tuple[SessionDataset, SessionDataset, SessionDataset]:
    """Filter rare items and short sessions, then split chronologically.

    Items occurring fewer than ``min_item_freq`` times across all
    interactions are removed first; sessions shorter than
    ``min_session_len`` are dropped afterwards. Surviving sessions are
    ordered by the timestamp of their last interaction (stable on input
    order) and partitioned by the cumulative ratios. The vocabulary is
    built from the train split only; valid/test items absent from it are
    dropped, with the length filter re-applied.
    """
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ConfigError(f"split ratios must be nonnegative and sum to 1, got {ratios}")

    raw = _group_sessions(interactions)
    if stats is not None:
        stats.raw_interactions = len(interactions)
        stats.raw_sessions = len(raw)

    counts = Counter(it.item_id for it in interactions)
    kept_items = {tok for tok, c in counts.items() if c >= min_item_freq}
    if stats is not None:
        stats.removed_items = len(counts) - len(kept_items)

    filtered: list[_RawSession] = []
    dropped_short = 0
    for s in raw:
        keep = [(tok, t) for tok, t in zip(s.items, s.times) if tok in kept_items]
        if len(keep) < min_session_len:
            dropped_short += 1
            continue
        filtered.append(
            _RawSession(
                session_id=s.session_id,
                items=[tok for tok, _ in keep],
                times=[t for _, t in keep],
                first_seen=s.first_seen,
            )
        )
    if stats is not None:
        stats.dropped_short_sessions = dropped_short
    if not filtered:
        raise EmptyDatasetError(
            "filtering removed every session "
            f"(min_item_freq={min_item_freq}, min_session_len={min_session_len})"
        )

    filtered.sort(key=lambda s: s.last_time)  # stable: ties keep input order
    m = len(filtered)
    cut_train = int(m * ratios[0])
    cut_valid = int(m * (ratios[0] + ratios[1]))
    train_raw = filtered[:cut_train]
    valid_raw = filtered[cut_train:cut_valid]
    test_raw = filtered[cut_valid:]
    if not train_raw:
        raise EmptyDatasetError(f"train split is empty ({m} sessions, ratios {ratios})")

    vocab_tokens: list[str] = []
    seen: set[str] = set()
    for s in train_raw:
        for tok in s.items:
            if tok not in seen:
                seen.add(tok)
                vocab_tokens.append(tok)
    vocab = ItemVocab(vocab_tokens)

    def to_dataset(split_raw: list[_RawSession], tag: str, restrict: bool) -> SessionDataset:
        sessions, sids, times = [], [], []
        dropped = 0
        for s in split_raw:
            if restrict:
                pairs = [(vocab.get(tok), t) for tok, t in zip(s.items, s.times)]
                pairs = [(i, t) for i, t in pairs if i is not None]
            else:
                pairs = [(vocab.token_to_index[tok], t) for tok, t in zip(s.items, s.times)]
            if len(pairs) < min_session_len:
                dropped += 1
                continue
            sessions.append([i for i, _ in pairs])
            times.append([t for _, t in pairs])
            sids.append(s.session_id)
        if stats is not None and restrict:
            stats.eval_sessions_dropped += dropped
        return SessionDataset(sessions, tag, vocab, session_ids=sids, timestamps=times)

    train = to_dataset(train_raw, "train", restrict=False)
    valid = to_dataset(valid_raw, "valid", restrict=True)
    test = to_dataset(test_raw, "test", restrict=True)
    if stats is not None:
        stats.split_sizes = (len(train), len(valid), len(test))
    return train, valid, test


def build_session_matrix(dataset: SessionDataset) -> sp.csr_matrix:
    """Binary session-by-item matrix: entry 1 at each distinct item of a
    session (repeats collapse to 1)."""
    if not dataset.sessions:
        raise DataError("cannot build a session matrix from an empty dataset")
    n = len(dataset.vocab)
    rows, cols = [], []
    for r, session in enumerate(dataset.sessions):
        if not session:
            raise DataError(f"session {r} is empty after vocabulary mapping")
        for c in sorted(set(session)):
            rows.append(r)
            cols.append(c)
    data = np.ones(len(rows), dtype=np.float64)
    return sp.csr_matrix(
        (data, (np.asarray(rows), np.asarray(cols))),
        shape=(len(dataset.sessions), n),
    )


def load_sessions(
    path: str | Path,
    vocab: ItemVocab,
    fmt: LogFormat = LogFormat(),
    keep_unmapped: bool = False,
    min_session_len: int = DEFAULT_MIN_SESSION_LEN,
) -> tuple[list[list[int | None]], list[str]]:
    """Read a (pre-filtered) split file back into index sequences.

    With ``keep_unmapped`` the positions of out-of-vocabulary items are
    kept as None so evaluation can count skipped targets; otherwise those
    items are dropped and too-short sessions removed.
    """
    result = ingest_sessions(path, fmt)
    raw = _group_sessions(result.interactions)
    raw.sort(key=lambda s: s.last_time)
    sessions: list[list[int | None]] = []
    sids: list[str] = []
    for s in raw:
        mapped: list[int | None] = [vocab.get(tok) for tok in s.items]
        if not keep_unmapped:
            mapped = [i for i in mapped if i is not None]
            if len(mapped) < min_session_len:
                continue
        sessions.append(mapped)
        sids.append(s.session_id)
    if not sessions:
        raise EmptyDatasetError(f"no usable sessions in {path}")
    return sessions, sids


def dataset_from_split_file(
    path: str | Path,
    vocab: ItemVocab,
    fmt: LogFormat = LogFormat(),
    split_tag: str = "train",
) -> SessionDataset:
    """Strict loader for training: unmapped items dropped, sessions >= 2."""
    sessions, sids = load_sessions(path, vocab, fmt, keep_unmapped=False)
    return SessionDataset([[i for i in s if i is not None] for s in sessions], split_tag, vocab, session_ids=sids)


def write_sessions(dataset: SessionDataset, path: str | Path, fmt: LogFormat = LogFormat()) -> None:
    """Write a dataset back out in the ingestion format (one interaction
    per line, original timestamps preserved)."""
    if dataset.session_ids is None or dataset.timestamps is None:
        raise DataError("dataset lacks session ids/timestamps; cannot serialize")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sid, items, times in zip(dataset.session_ids, dataset.sessions, dataset.timestamps):
            for idx, t in zip(items, times):
                tok = dataset.vocab.token(idx)
                fh.write(fmt.delimiter.join((sid, tok, str(t))) + "\n")
