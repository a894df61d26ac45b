"""Seeded synthetic session logs driven by a random item-transition
chain, for desk-scale end-to-end runs and benchmarks.

Each item gets a handful of preferred successors holding most of the
probability mass, the remainder spread uniformly, so the generated
sessions carry genuine sequential structure for transition models to
find. Timestamps are a global counter, making the chronological split
deterministic.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import LogFormat


def generate_markov_log(
    path: str | Path,
    n_items: int = 200,
    n_sessions: int = 5000,
    seed: int = 42,
    min_len: int = 3,
    max_len: int = 10,
    branching: int = 3,
    noise: float = 0.1,
    fmt: LogFormat = LogFormat(),
) -> None:
    """Write a synthetic interaction log sampled from a seeded chain."""
    rng = np.random.default_rng(seed)
    successors = np.empty((n_items, branching), dtype=np.int64)
    for i in range(n_items):
        successors[i] = rng.choice(n_items, size=branching, replace=False)
    # geometric preference over the successor slots, e.g. 4:2:1
    slot_weights = 0.5 ** np.arange(branching)
    slot_probs = slot_weights / slot_weights.sum()

    width = len(str(n_items - 1))
    token = [f"item{i:0{width}d}" for i in range(n_items)]
    clock = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in range(n_sessions):
            sid = f"s{s:06d}"
            length = int(rng.integers(min_len, max_len + 1))
            item = int(rng.integers(n_items))
            for _ in range(length):
                fh.write(fmt.delimiter.join((sid, token[item], str(clock))) + "\n")
                clock += 1
                if rng.random() < noise:
                    item = int(rng.integers(n_items))
                else:
                    slot = int(rng.choice(branching, p=slot_probs))
                    item = int(successors[item, slot])
