"""Readers for the toolkit's vocabulary and session file formats.

Vocabulary: one item token per line, line number = column index.
Session file: delimiter-separated (session_id, item_id, timestamp) rows.
"""

from __future__ import annotations

import csv
from pathlib import Path


def load_vocab(path: str | Path) -> dict[str, int]:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = [line.rstrip("\n") for line in fh]
    while tokens and tokens[-1] == "":
        tokens.pop()
    if not tokens:
        raise ValueError(f"vocabulary file is empty: {path}")
    mapping = {tok: i for i, tok in enumerate(tokens)}
    if len(mapping) != len(tokens):
        raise ValueError(f"vocabulary file has duplicate tokens: {path}")
    return mapping


def load_sessions(
    path: str | Path,
    vocab: dict[str, int],
    delimiter: str = ",",
    has_header: bool = False,
) -> list[list[int]]:
    """Sessions as index sequences, each ordered by (timestamp, file
    order); out-of-vocabulary items are dropped, sessions shorter than
    two items discarded."""
    buckets: dict[str, list[tuple[int, int, int]]] = {}
    order: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for pos, row in enumerate(reader):
            if has_header and pos == 0:
                continue
            if len(row) < 3:
                continue
            sid, tok, ts_text = row[0], row[1], row[2]
            try:
                ts = int(ts_text)
            except ValueError:
                continue
            idx = vocab.get(tok)
            if idx is None:
                continue
            if sid not in buckets:
                buckets[sid] = []
                order.append(sid)
            buckets[sid].append((ts, pos, idx))
    sessions = []
    for sid in order:
        events = sorted(buckets[sid], key=lambda e: (e[0], e[1]))
        items = [idx for _, _, idx in events]
        if len(items) >= 2:
            sessions.append(items)
    if not sessions:
        raise ValueError(f"no usable sessions in {path}")
    return sessions
