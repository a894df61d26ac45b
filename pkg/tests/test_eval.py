import math

import numpy as np
import pytest

from linkrec.data import ItemVocab, SessionDataset
from linkrec.errors import DataError
from linkrec.evaluate import (
    evaluate_iterative,
    evaluate_leave_one_out,
    head_item_set,
    head_tail_partition,
)
from linkrec.inference import (
    InferenceVector,
    build_inference_vector,
    count_inference_flops,
    predict_topn,
)
from linkrec.solvers import ItemItemModel, SolverConfig


def model_of(matrix):
    m = np.asarray(matrix, dtype=float)
    return ItemItemModel(m, "S", SolverConfig())


class TestInferenceVector:
    def test_three_item_decay(self):
        x = build_inference_vector([0, 1, 2], delta_inf=1.0)
        w = dict(zip(x.indices.tolist(), x.weights.tolist()))
        assert w[2] == pytest.approx(math.exp(0), abs=1e-15)
        assert w[1] == pytest.approx(math.exp(-1), abs=1e-15)
        assert w[0] == pytest.approx(math.exp(-2), abs=1e-15)

    def test_single_item(self):
        x = build_inference_vector([4], delta_inf=3.0)
        assert x.nnz == 1 and x.weights[0] == 1.0

    def test_repeat_keeps_most_recent(self):
        x = build_inference_vector([0, 1, 0], delta_inf=1.0)
        w = dict(zip(x.indices.tolist(), x.weights.tolist()))
        assert w[0] == pytest.approx(1.0, abs=1e-15)
        assert w[1] == pytest.approx(math.exp(-1), abs=1e-15)

    def test_unmapped_items_skipped(self):
        x = build_inference_vector([None, 3, None, 5], delta_inf=1.0)
        w = dict(zip(x.indices.tolist(), x.weights.tolist()))
        assert w[5] == 1.0 and w[3] == pytest.approx(math.exp(-1), abs=1e-15)

    def test_all_unmapped_is_error(self):
        with pytest.raises(DataError):
            build_inference_vector([None, None], delta_inf=1.0)
        with pytest.raises(DataError):
            build_inference_vector([], delta_inf=1.0)

    def test_weight_range_invariant(self):
        x = build_inference_vector(list(range(10)), delta_inf=0.3)
        assert np.all(x.weights > 0) and np.all(x.weights <= 1.0)
        assert x.weights.max() == 1.0


class TestPredictTopn:
    def test_identity_keeps_seen_item_first(self):
        model = model_of(np.eye(3))
        x = build_inference_vector([1], 1.0)
        ranked = predict_topn(x, model, 1, exclude_seen=False)
        assert ranked.items.tolist() == [1]

    def test_exclude_seen_tie_break(self):
        model = model_of(np.eye(3))
        x = build_inference_vector([1], 1.0)
        ranked = predict_topn(x, model, 3, exclude_seen=True)
        assert ranked.items.tolist() == [0, 2, 1]  # zeros tie, index order; seen sinks

    def test_hand_built_scores(self):
        B = np.zeros((3, 3))
        B[0, 1], B[0, 2] = 0.9, 0.1
        ranked = predict_topn(build_inference_vector([0], 1.0), model_of(B), 2)
        assert ranked.items.tolist() == [1, 2]
        assert ranked.scores.tolist() == [0.9, 0.1]

    def test_topn_truncated_with_warning(self):
        model = model_of(np.eye(2))
        with pytest.warns(UserWarning, match="truncat"):
            ranked = predict_topn(build_inference_vector([0], 1.0), model, 5)
        assert len(ranked) == 2

    def test_negative_topn_rejected(self):
        model = model_of(np.eye(3))
        with pytest.raises(DataError):
            predict_topn(build_inference_vector([0], 1.0), model, -1)

    def test_entry_order_invariance(self):
        B = np.arange(16, dtype=float).reshape(4, 4)
        x1 = InferenceVector(np.array([0, 2]), np.array([0.5, 1.0]))
        x2 = InferenceVector(np.array([2, 0]), np.array([1.0, 0.5]))
        r1 = predict_topn(x1, model_of(B), 4)
        r2 = predict_topn(x2, model_of(B), 4)
        assert r1.items.tolist() == r2.items.tolist()
        assert np.allclose(r1.scores, r2.scores, atol=1e-15)

    def test_positive_scaling_invariance(self):
        rng = np.random.default_rng(0)
        B = rng.standard_normal((5, 5))
        x = build_inference_vector([1, 3], 1.0)
        r1 = predict_topn(x, model_of(B), 5)
        r2 = predict_topn(x, model_of(3.7 * B), 5)
        assert r1.items.tolist() == r2.items.tolist()


class TestFlops:
    def test_values(self):
        assert count_inference_flops(InferenceVector(np.arange(1), np.ones(1)), 100) == 200
        assert count_inference_flops(InferenceVector(np.arange(0), np.ones(0)), 100) == 0
        assert count_inference_flops(InferenceVector(np.arange(3), np.ones(3)), 10) == 60


def toy_model_and_sessions():
    """Hand-scored fixture; intended full-ranking ranks, verified by hand:

    iterative: ([0]->1: rank 2), ([0,1]->2: rank 1), ([3]->4: rank 1),
               ([5]->6: rank 6), ([5,6]->7: rank 21)
    leave-one-out: targets 2, 4, 7 at ranks 1, 1, 21.
    """
    n = 25
    B = np.zeros((n, n))
    B[0, 10], B[0, 1] = 0.95, 0.8
    B[1, 2] = 0.7
    B[3, 4] = 0.9
    B[5, 10:15] = [0.9, 0.85, 0.8, 0.75, 0.7]
    B[5, 6] = 0.5
    for k, j in enumerate(list(range(0, 7)) + list(range(8, 21))):
        B[6, j] = 20.0 - k
    B[6, 7] = 0.001
    sessions = [[0, 1, 2], [3, 4], [5, 6, 7]]
    return model_of(B), sessions


class TestProtocolMetrics:
    def test_iterative_hand_scored(self):
        model, sessions = toy_model_and_sessions()
        report = evaluate_iterative(model, sessions, ks=(5, 20), delta_inf=1.0)
        assert report.predictions == 5
        assert report.skipped == 0
        log2 = math.log2
        assert report.recall(5) == pytest.approx(3 / 5, abs=1e-12)
        assert report.mrr(5) == pytest.approx((1 / 2 + 1 + 1) / 5, abs=1e-12)
        assert report.ndcg(5) == pytest.approx((1 / log2(3) + 1 + 1) / 5, abs=1e-12)
        assert report.recall(20) == pytest.approx(4 / 5, abs=1e-12)
        assert report.mrr(20) == pytest.approx((1 / 2 + 1 + 1 + 1 / 6) / 5, abs=1e-12)
        assert report.ndcg(20) == pytest.approx(
            (1 / log2(3) + 1 + 1 + 1 / log2(7)) / 5, abs=1e-12
        )

    def test_leave_one_out_hand_scored(self):
        model, sessions = toy_model_and_sessions()
        report = evaluate_leave_one_out(model, sessions, ks=(5, 20), delta_inf=1.0)
        assert report.predictions == 3
        for k in (5, 20):
            assert report.recall(k) == pytest.approx(2 / 3, abs=1e-12)
            assert report.mrr(k) == pytest.approx(2 / 3, abs=1e-12)
            assert report.ndcg(k) == pytest.approx(2 / 3, abs=1e-12)

    def test_single_prediction_rank_three(self):
        B = np.zeros((25, 25))
        B[0, 10], B[0, 11], B[0, 1] = 0.9, 0.8, 0.7  # target 1 at rank 3
        report = evaluate_iterative(model_of(B), [[0, 1]], ks=(20,), delta_inf=1.0)
        assert report.recall(20) == 1.0
        assert report.mrr(20) == pytest.approx(1 / 3, abs=1e-12)
        assert report.ndcg(20) == pytest.approx(1 / math.log2(4), abs=1e-12)
        assert report.ndcg(20) == pytest.approx(0.5, abs=1e-12)

    def test_rank_just_outside_cutoff_scores_zero(self):
        n = 25
        B = np.zeros((n, n))
        for k, j in enumerate([j for j in range(n) if j not in (0, 1)][:20]):
            B[0, j] = 2.0 - 0.01 * k
        B[0, 1] = 0.5  # rank 21
        report = evaluate_iterative(model_of(B), [[0, 1]], ks=(20,), delta_inf=1.0)
        assert report.recall(20) == 0.0
        assert report.mrr(20) == 0.0
        assert report.ndcg(20) == 0.0

    def test_session_of_three_contributes_two_predictions(self):
        model, _ = toy_model_and_sessions()
        report = evaluate_iterative(model, [[0, 1, 2]], ks=(5,), delta_inf=1.0)
        assert report.predictions == 2

    def test_protocols_coincide_for_length_two(self):
        model, _ = toy_model_and_sessions()
        it = evaluate_iterative(model, [[3, 4]], ks=(5, 20), delta_inf=1.0)
        loo = evaluate_leave_one_out(model, [[3, 4]], ks=(5, 20), delta_inf=1.0)
        strip = lambda fields: {k: v for k, v in fields.items() if k != "protocol"}
        assert strip(it.as_fields()) == strip(loo.as_fields())

    def test_two_sessions_mrr_average(self):
        n = 25
        B = np.zeros((n, n))
        B[0, 1] = 1.0  # rank 1
        B[2, 10], B[2, 11], B[2, 12], B[2, 3] = 0.9, 0.8, 0.7, 0.6  # rank 4
        report = evaluate_leave_one_out(model_of(B), [[0, 1], [2, 3]], ks=(20,), delta_inf=1.0)
        assert report.mrr(20) == pytest.approx((1 + 0.25) / 2, abs=1e-12)

    def test_unmapped_target_skipped_and_counted(self):
        model, _ = toy_model_and_sessions()
        report = evaluate_iterative(model, [[0, None], [0, 1]], ks=(5,), delta_inf=1.0)
        assert report.predictions == 1  # only [0] -> 1 is scorable
        assert report.skipped == 1  # [0] -> None has no in-vocab target

    def test_fully_unmapped_prefix_skipped(self):
        model, _ = toy_model_and_sessions()
        report = evaluate_iterative(model, [[None, 1]], ks=(5,), delta_inf=1.0)
        assert report.predictions == 0
        assert report.skipped == 1

    def test_empty_test_set_fatal(self):
        model, _ = toy_model_and_sessions()
        with pytest.raises(DataError):
            evaluate_iterative(model, [], ks=(5,), delta_inf=1.0)

    def test_concatenation_equals_weighted_average(self):
        model, sessions = toy_model_and_sessions()
        part1, part2 = [sessions[0]], sessions[1:]
        r1 = evaluate_iterative(model, part1, ks=(5, 20), delta_inf=1.0)
        r2 = evaluate_iterative(model, part2, ks=(5, 20), delta_inf=1.0)
        whole = evaluate_iterative(model, part1 + part2, ks=(5, 20), delta_inf=1.0)
        n1, n2 = r1.predictions, r2.predictions
        for k in (5, 20):
            for metric in ("recall", "mrr", "ndcg"):
                merged = (n1 * getattr(r1, metric)(k) + n2 * getattr(r2, metric)(k)) / (n1 + n2)
                assert getattr(whole, metric)(k) == pytest.approx(merged, abs=1e-12)

    def test_flops_per_prediction(self):
        model, sessions = toy_model_and_sessions()
        report = evaluate_iterative(model, sessions, ks=(5,), delta_inf=1.0)
        # nnz per prediction: 1,2,1,1,2 over n=25 -> total 2*25*7 = 350
        assert report.flops_total == 350
        assert report.flops_per_prediction == 70


class TestHeadTail:
    @staticmethod
    def counted_dataset(counts):
        vocab = ItemVocab([f"i{k}" for k in range(len(counts))])
        sessions = []
        for item, c in enumerate(counts):
            sessions += [[item, item]] * (c // 2) + ([[item]] if c % 2 else [])
        return SessionDataset(sessions, "train", vocab)

    def test_five_items_head_is_top_one(self):
        ds = self.counted_dataset([9, 7, 5, 3, 1])
        part = head_tail_partition(ds)
        assert part == {0: "head", 1: "tail", 2: "tail", 3: "tail", 4: "tail"}

    def test_equal_counts_tie_break_by_index(self):
        ds = self.counted_dataset([4, 4, 4, 4, 4])
        part = head_tail_partition(ds)
        assert head_item_set(part) == {0}

    def test_ten_items_head_size_two(self):
        ds = self.counted_dataset(list(range(20, 0, -2)))
        part = head_tail_partition(ds)
        assert head_item_set(part) == {0, 1}

    def test_breakdown_counts_partition(self):
        model, sessions = toy_model_and_sessions()
        head_items = {1, 2, 4}
        report = evaluate_iterative(model, sessions, ks=(5,), delta_inf=1.0, head_items=head_items)
        assert report.head.predictions + report.tail.predictions == report.predictions
        assert report.head.predictions == 3  # targets 1, 2, 4
        fields = report.as_fields()
        assert "head.recall@5" in fields and "tail.recall@5" in fields

    def test_report_serialization_fields(self, tmp_path):
        model, sessions = toy_model_and_sessions()
        report = evaluate_iterative(model, sessions, ks=(5, 20), delta_inf=1.0, head_items={1})
        report.save(tmp_path / "r.txt", tmp_path / "r.json")
        text = (tmp_path / "r.txt").read_text()
        for key in ("recall@5", "mrr@20", "ndcg@20", "head.recall@5", "tail.recall@5",
                    "predictions", "skipped", "flops_per_prediction"):
            assert any(line.startswith(key + " ") for line in text.splitlines())
        import json

        blob = json.loads((tmp_path / "r.json").read_text())
        assert blob["predictions"] == 5
        assert blob["recall@20"] == report.recall(20)
