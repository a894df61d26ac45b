"""Ranking evaluation under the iterative-revealing and leave-one-out
protocols, with head/tail popularity breakdowns and report serialization.

All metrics use full ranking over the item vocabulary. Each prediction
contributes Recall@K (target in top K), MRR@K (1/rank when rank <= K),
and NDCG@K (1/log2(1+rank) when rank <= K, single relevant item).
Predictions whose target is out of vocabulary, or whose prefix maps to
nothing, are skipped and counted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import SessionDataset
from .errors import DataError
from .inference import build_inference_vector, count_inference_flops, score_vector
from .solvers import ItemItemModel

HEAD_FRACTION = 0.2


@dataclass
class MetricBlock:
    """Per-cutoff metric sums plus the prediction count they average over."""

    ks: tuple[int, ...]
    predictions: int = 0
    recall_sum: dict[int, float] = field(default_factory=dict)
    mrr_sum: dict[int, float] = field(default_factory=dict)
    ndcg_sum: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for k in self.ks:
            self.recall_sum.setdefault(k, 0.0)
            self.mrr_sum.setdefault(k, 0.0)
            self.ndcg_sum.setdefault(k, 0.0)

    def add(self, rank: int) -> None:
        self.predictions += 1
        for k in self.ks:
            if rank <= k:
                self.recall_sum[k] += 1.0
                self.mrr_sum[k] += 1.0 / rank
                self.ndcg_sum[k] += 1.0 / math.log2(1.0 + rank)

    def mean(self, sums: dict[int, float], k: int) -> float:
        return sums[k] / self.predictions if self.predictions else 0.0


@dataclass
class EvalReport:
    protocol: str
    ks: tuple[int, ...]
    overall: MetricBlock
    head: MetricBlock | None
    tail: MetricBlock | None
    skipped: int
    flops_total: int

    @property
    def predictions(self) -> int:
        return self.overall.predictions

    @property
    def flops_per_prediction(self) -> int:
        return round(self.flops_total / self.predictions) if self.predictions else 0

    def recall(self, k: int) -> float:
        return self.overall.mean(self.overall.recall_sum, k)

    def mrr(self, k: int) -> float:
        return self.overall.mean(self.overall.mrr_sum, k)

    def ndcg(self, k: int) -> float:
        return self.overall.mean(self.overall.ndcg_sum, k)

    def as_fields(self) -> dict[str, object]:
        """Flat field map shared by both serializations."""
        out: dict[str, object] = {
            "protocol": self.protocol,
            "predictions": self.predictions,
            "skipped": self.skipped,
            "flops_per_prediction": self.flops_per_prediction,
        }
        for k in self.ks:
            out[f"recall@{k}"] = self.recall(k)
            out[f"mrr@{k}"] = self.mrr(k)
            out[f"ndcg@{k}"] = self.ndcg(k)
        for name, block in (("head", self.head), ("tail", self.tail)):
            if block is None:
                continue
            out[f"{name}.predictions"] = block.predictions
            for k in self.ks:
                out[f"{name}.recall@{k}"] = block.mean(block.recall_sum, k)
                out[f"{name}.mrr@{k}"] = block.mean(block.mrr_sum, k)
                out[f"{name}.ndcg@{k}"] = block.mean(block.ndcg_sum, k)
        return out

    def to_text(self) -> str:
        return "".join(f"{key} {value!r}\n" if isinstance(value, float) else f"{key} {value}\n"
                       for key, value in self.as_fields().items())

    def to_json(self) -> str:
        return json.dumps(self.as_fields(), indent=2, sort_keys=False) + "\n"

    def save(self, text_path: str | Path, json_path: str | Path) -> None:
        Path(text_path).write_text(self.to_text(), encoding="utf-8")
        Path(json_path).write_text(self.to_json(), encoding="utf-8")


def _rank_of_target(scores: np.ndarray, target: int) -> int:
    """1-based full-ranking position under descending score with
    ascending-index tie-breaks."""
    t_score = scores[target]
    higher = int(np.count_nonzero(scores > t_score))
    tied_before = int(np.count_nonzero(scores[:target] == t_score))
    return 1 + higher + tied_before


def _evaluate(
    model: ItemItemModel,
    prefix_target_pairs: Iterable[tuple[list[int | None], int | None]],
    ks: Sequence[int],
    delta_inf: float,
    protocol: str,
    head_items: set[int] | None,
    exclude_seen: bool,
) -> EvalReport:
    ks_t = tuple(sorted(set(int(k) for k in ks)))
    overall = MetricBlock(ks_t)
    head = MetricBlock(ks_t) if head_items is not None else None
    tail = MetricBlock(ks_t) if head_items is not None else None
    skipped = 0
    flops_total = 0
    any_pairs = False
    for prefix, target in prefix_target_pairs:
        any_pairs = True
        if target is None:
            skipped += 1
            continue
        try:
            x = build_inference_vector(prefix, delta_inf)
        except DataError:
            skipped += 1
            continue
        scores = score_vector(x, model)
        if exclude_seen:
            scores = scores.copy()
            scores[x.indices] = -np.inf
        rank = _rank_of_target(scores, target)
        flops_total += count_inference_flops(x, model.n)
        overall.add(rank)
        if head_items is not None:
            (head if target in head_items else tail).add(rank)
    if not any_pairs:
        raise DataError("no sessions to evaluate")
    return EvalReport(protocol, ks_t, overall, head, tail, skipped, flops_total)


def _sessions_of(test) -> list[list[int | None]]:
    sessions = test.sessions if isinstance(test, SessionDataset) else list(test)
    if not sessions:
        raise DataError("test set is empty")
    return sessions


def evaluate_iterative(
    model: ItemItemModel,
    test,
    ks: Sequence[int],
    delta_inf: float,
    head_items: set[int] | None = None,
    exclude_seen: bool = False,
) -> EvalReport:
    """Reveal each session one item at a time: every prefix of length
    1..len-1 predicts the next item."""
    sessions = _sessions_of(test)

    def pairs():
        for s in sessions:
            for cut in range(1, len(s)):
                yield s[:cut], s[cut]

    return _evaluate(model, pairs(), ks, delta_inf, "iterative", head_items, exclude_seen)


def evaluate_leave_one_out(
    model: ItemItemModel,
    test,
    ks: Sequence[int],
    delta_inf: float,
    head_items: set[int] | None = None,
    exclude_seen: bool = False,
) -> EvalReport:
    """One prediction per session: all but the final item form the
    prefix, the final item is the target."""
    sessions = _sessions_of(test)
    pairs = ((s[:-1], s[-1]) for s in sessions if len(s) >= 2)
    return _evaluate(model, pairs, ks, delta_inf, "leave_one_out", head_items, exclude_seen)


def head_tail_partition(train: SessionDataset) -> dict[int, str]:
    """Label the top ceil(20%) of items by training interaction count as
    'head', the rest 'tail'. Boundary ties resolve by ascending index."""
    n = len(train.vocab)
    counts = np.zeros(n, dtype=np.int64)
    for session in train.sessions:
        for item in session:
            counts[item] += 1
    order = np.lexsort((np.arange(n), -counts))
    head_size = int(np.ceil(HEAD_FRACTION * n))
    labels = {}
    for pos, item in enumerate(order):
        labels[int(item)] = "head" if pos < head_size else "tail"
    return labels


def head_item_set(partition: dict[int, str]) -> set[int]:
    return {i for i, label in partition.items() if label == "head"}
