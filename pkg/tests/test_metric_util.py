# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

from utils.dataset_util import generate_graph, split_edges
from utils.encoder_util import EncoderConfig
from utils.error_util import ValidationError
from utils.metric_util import (MetricReport, RankingResult, build_eval_candidates, evaluate_model, hits_at_k,
                               metric_key, mrr, ranking_auc, reciprocal_ranks, score_candidates)
from utils.model_util import LinkModel
from utils.predictor_util import PredictorConfig


def test_hits_at_k():
    r = RankingResult([0.85, 0.7], shared_neg_scores=[0.9, 0.8, 0.1])
    assert hits_at_k(r, 2) == 0.5
    assert hits_at_k(RankingResult([5.0, 6.0], shared_neg_scores=[1.0, 2.0]), 1) == 1.0
    assert hits_at_k(RankingResult([0.8], shared_neg_scores=[0.9, 0.8, 0.1]), 2) == 0.0
    with pytest.raises(ValidationError):
        hits_at_k(r, 4)


def test_mrr():
    assert mrr(RankingResult([0.7], per_pos_neg_scores=[[0.9, 0.7, 0.1]])) == pytest.approx(0.4)
    above = RankingResult([2.0], per_pos_neg_scores=[np.linspace(0, 1, 1000)])
    assert mrr(above) == 1.0
    below = RankingResult([-1.0], per_pos_neg_scores=[np.zeros(9)])
    assert mrr(below) == pytest.approx(0.1)
    with pytest.raises(ValidationError):
        mrr(RankingResult([1.0], per_pos_neg_scores=[[]]))


def test_ranking_result_needs_one_mode():
    with pytest.raises(ValidationError):
        RankingResult([1.0])
    with pytest.raises(ValidationError):
        RankingResult([1.0], shared_neg_scores=[0.0], per_pos_neg_scores=[[0.0]])


def test_metrics_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pos = rng.integers(0, 20, size=rng.integers(1, 250)).astype(float)
        neg = rng.integers(0, 20, size=rng.integers(1, 250)).astype(float)
        k = int(rng.integers(1, len(neg) + 1))
        shared = RankingResult(pos, shared_neg_scores=neg)
        above = pos[:, None] > neg[None, :]

        assert ranking_auc(shared) == int(above.sum()) / (len(pos) * len(neg))

        at_or_above = (neg[None, :] >= pos[:, None]).sum(axis=1)
        assert hits_at_k(shared, k) == int((at_or_above < k).sum()) / len(pos)

        per_pos = [rng.integers(0, 20, size=rng.integers(1, 20)).astype(float) for _ in pos]
        rr = [1.0 / (1 + sum(n > p for n in negs) + 0.5 * sum(n == p for n in negs))
              for p, negs in zip(pos, per_pos)]
        assert mrr(RankingResult(pos, per_pos_neg_scores=per_pos)) == pytest.approx(np.mean(rr), rel=1e-12)


@pytest.fixture(scope='module')
def sbm_split():
    g = generate_graph('sbm', 400, seed=0)
    return split_edges(g, (0.8, 0.1, 0.1), np.random.default_rng(0))


def test_candidates_avoid_known_edges(sbm_split):
    cand = build_eval_candidates(sbm_split.full_graph, sbm_split.test, 500, 20, seed=11)
    full = sbm_split.full_graph
    assert not full.has_edges(cand.shared_neg[:, 0], cand.shared_neg[:, 1]).any()
    flat = cand.per_pos_neg.reshape(-1, 2)
    assert not full.has_edges(flat[:, 0], flat[:, 1]).any()
    assert np.array_equal(cand.per_pos_neg[:, :, 0], np.repeat(sbm_split.test[:, :1], 20, axis=1))


def test_perfect_scorer(sbm_split):
    cand = build_eval_candidates(sbm_split.full_graph, sbm_split.test, 500, 20, seed=11)
    full = sbm_split.full_graph
    report = score_candidates(lambda pairs: full.has_edges(pairs[:, 0], pairs[:, 1]).astype(float), cand, 20)
    assert report.metrics == {'auc': 1.0, 'hits@20': 1.0, 'mrr': 1.0}


def test_untrained_model_is_near_chance(sbm_split):
    model = LinkModel(sbm_split.train_graph, EncoderConfig('embedding_only', num_layers=0, embedding_dim=16),
                      PredictorConfig('dot'))
    model.init_params(np.random.default_rng(0))
    cand = build_eval_candidates(sbm_split.full_graph, sbm_split.test, 500, 0, seed=3)
    report = evaluate_model(model, cand, 20)
    assert abs(report['auc'] - 0.5) <= 0.05
    again = evaluate_model(model, build_eval_candidates(sbm_split.full_graph, sbm_split.test, 500, 0, seed=3), 20)
    assert again.to_json() == report.to_json()


def test_metric_report_json():
    report = MetricReport({'auc': 0.75}, seed=3, epoch=7)
    assert json.loads(report.to_json()) == {'auc': 0.75, 'seed': 3, 'epoch': 7}
    assert metric_key('hits', 50) == 'hits@50'


def test_hits_never_drops_as_k_grows():
    rng = np.random.default_rng(3)
    for _ in range(50):
        r = RankingResult(rng.integers(0, 10, size=30).astype(float),
                          shared_neg_scores=rng.integers(0, 10, size=40).astype(float))
        hits = [hits_at_k(r, k) for k in range(1, 41)]
        assert all(a <= b for a, b in zip(hits, hits[1:]))


def test_tied_rank_sits_between_optimistic_and_pessimistic():
    rng = np.random.default_rng(4)
    pos = rng.integers(0, 5, size=200).astype(float)
    per_pos = [rng.integers(0, 5, size=rng.integers(1, 15)).astype(float) for _ in pos]
    rr = reciprocal_ranks(RankingResult(pos, per_pos_neg_scores=per_pos))
    for p, negs, value in zip(pos, per_pos, rr):
        greater, ties = int(np.sum(negs > p)), int(np.sum(negs == p))
        assert 1.0 / (1 + greater + ties) <= value <= 1.0 / (1 + greater)
        if ties:
            assert 1.0 / (1 + greater + ties) < value < 1.0 / (1 + greater)
