# -*- coding: utf-8 -*-
"""
Ranking evaluation.

Tie rules are fixed: Hits@K counts a positive only when it is strictly above the
K-th best shared negative; MRR ranks a positive at the middle of its ties.
"""
import json

import numpy as np

from utils.error_util import UndefinedMetricError, ValidationError
from utils.objective_util import empirical_auc
from utils.sampler_util import sample_global, sample_local_batch


class RankingResult(object):

    def __init__(self, pos_scores, shared_neg_scores=None, per_pos_neg_scores=None):
        if (shared_neg_scores is None) == (per_pos_neg_scores is None):
            raise ValidationError('exactly one of shared_neg_scores and per_pos_neg_scores must be given')
        self.pos_scores = np.asarray(pos_scores, dtype=np.float64).reshape(-1)
        self.shared_neg_scores = None
        self.per_pos_neg_scores = None
        if shared_neg_scores is not None:
            self.shared_neg_scores = np.asarray(shared_neg_scores, dtype=np.float64).reshape(-1)
        else:
            if len(per_pos_neg_scores) != len(self.pos_scores):
                raise ValidationError(f'{len(per_pos_neg_scores)} candidate lists for {len(self.pos_scores)} positives')
            self.per_pos_neg_scores = [np.asarray(s, dtype=np.float64).reshape(-1) for s in per_pos_neg_scores]
        for arr in [self.pos_scores, self.shared_neg_scores] + (self.per_pos_neg_scores or []):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValidationError('ranking scores must be finite')


def hits_at_k(r, k):
    if r.shared_neg_scores is None:
        raise ValidationError('Hits@K needs a shared negative set')
    if k < 1 or len(r.shared_neg_scores) < k:
        raise ValidationError(f'Hits@{k} needs at least {k} negatives, got {len(r.shared_neg_scores)}')
    if not len(r.pos_scores):
        raise UndefinedMetricError('Hits@K needs at least one positive')
    threshold = np.sort(r.shared_neg_scores)[-k]
    return float(np.mean(r.pos_scores > threshold))


def reciprocal_ranks(r):
    if r.per_pos_neg_scores is None:
        raise ValidationError('MRR needs per-positive negative lists')
    out = np.zeros(len(r.pos_scores))
    for i, (p, negs) in enumerate(zip(r.pos_scores, r.per_pos_neg_scores)):
        if not len(negs):
            raise ValidationError(f'positive {i} has an empty candidate list')
        rank = 1.0 + np.sum(negs > p) + 0.5 * np.sum(negs == p)
        out[i] = 1.0 / rank
    return out


def mrr(r):
    if not len(r.pos_scores):
        raise UndefinedMetricError('MRR needs at least one positive')
    return float(np.mean(reciprocal_ranks(r)))


def ranking_auc(r):
    """Shared mode: empirical AUC. Per-positive mode: AUC over each positive's own candidates."""
    if r.shared_neg_scores is not None:
        return empirical_auc(r.pos_scores, r.shared_neg_scores)
    wins, total = 0, 0
    for p, negs in zip(r.pos_scores, r.per_pos_neg_scores):
        wins += int(np.sum(negs < p))
        total += len(negs)
    if not total:
        raise UndefinedMetricError('AUC needs at least one negative score')
    return wins / total


class MetricReport(object):

    def __init__(self, metrics, **metadata):
        self.metrics = dict(metrics)
        self.metadata = metadata

    def __getitem__(self, name):
        return self.metrics[name]

    def to_dict(self):
        out = dict(self.metrics)
        out.update(self.metadata)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __repr__(self):
        return f'MetricReport({self.to_json()})'


class EvalCandidates(object):
    """Negative candidates for one evaluation split, sampled once from a recorded seed."""

    def __init__(self, pos, shared_neg, per_pos_neg, seed):
        self.pos = pos
        self.shared_neg = shared_neg
        self.per_pos_neg = per_pos_neg
        self.seed = seed


def build_eval_candidates(full_graph, pos, num_shared, num_per_pos, seed, exclude=None):
    """
    Shared set: global negatives. Per-positive lists: the source is kept and the
    target replaced uniformly by a non-neighbor. `full_graph` must hold every
    known edge so no held-out positive is ever drawn as a negative.
    """
    rng = np.random.default_rng(seed)
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    shared = sample_global(full_graph, num_shared, rng, exclude) if num_shared > 0 else None
    per_pos = None
    if num_per_pos > 0 and len(pos):
        flat = sample_local_batch(full_graph, np.repeat(pos, num_per_pos, axis=0), rng, 0.0, exclude, coin=False)
        per_pos = flat.reshape(len(pos), num_per_pos, 2)
    return EvalCandidates(pos, shared, per_pos, seed)


def score_candidates(scorer, candidates, hits_k=20, **metadata):
    """
    Rank every candidate with `scorer`, a function from an (n, 2) pair array to n scores.
    AUC comes from the shared set when there is one, else from the per-positive lists.
    """
    pos_scores = scorer(candidates.pos)
    metrics = {}
    if candidates.shared_neg is not None:
        shared = RankingResult(pos_scores, shared_neg_scores=scorer(candidates.shared_neg))
        metrics['auc'] = ranking_auc(shared)
        if len(shared.shared_neg_scores) >= hits_k:
            metrics[f'hits@{hits_k}'] = hits_at_k(shared, hits_k)
    if candidates.per_pos_neg is not None:
        p, k = candidates.per_pos_neg.shape[:2]
        neg_scores = scorer(candidates.per_pos_neg.reshape(-1, 2)).reshape(p, k)
        ranked = RankingResult(pos_scores, per_pos_neg_scores=list(neg_scores))
        metrics['mrr'] = mrr(ranked)
        metrics.setdefault('auc', ranking_auc(ranked))
    return MetricReport(metrics, eval_seed=candidates.seed, **metadata)


def evaluate_model(model, candidates, hits_k=20, h=None, **metadata):
    """Encode once in eval mode, then score every candidate with the same embeddings."""
    if h is None:
        h = model.embed('eval')
    return score_candidates(lambda pairs: model.predict(pairs, h), candidates, hits_k, **metadata)


def metric_key(eval_metric, hits_k):
    return {'auc': 'auc', 'hits': f'hits@{hits_k}', 'mrr': 'mrr'}[eval_metric]
