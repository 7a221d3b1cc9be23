# -*- coding: utf-8 -*-
"""
Neighborhood similarity baselines: common neighbors, Jaccard, preferential
attachment, Adamic-Adar and resource allocation.

Neighbor sets here exclude the node itself, unlike `graph_util.neighborhood`
which includes the center node.
"""
import math

import numpy as np

from utils.error_util import ValidationError
from utils.metric_util import RankingResult
from utils.other_utils import logger

HEURISTIC_KINDS = ('cn', 'jaccard', 'pa', 'aa', 'ra')

heuristic_models = {}
heuristic_model = lambda f: heuristic_models.setdefault(f.__name__, f)


@heuristic_model
def cn(g, u, v, common):
    return float(len(common))


@heuristic_model
def jaccard(g, u, v, common):
    union = len(g.neighbors(u)) + len(g.neighbors(v)) - len(common)
    return len(common) / union if union else 0.0


@heuristic_model
def pa(g, u, v, common):
    return float(len(g.neighbors(u)) * len(g.neighbors(v)))


@heuristic_model
def aa(g, u, v, common):
    total = 0.0
    for w in common:
        d = len(g.neighbors(w))
        if d <= 1:
            logger.warning(f'Skipped Adamic-Adar term for common neighbor {w} of degree {d}')
            continue
        total += 1.0 / math.log(d)
    return total


@heuristic_model
def ra(g, u, v, common):
    return sum(1.0 / len(g.neighbors(w)) for w in common)


def heuristic_score(g, u, v, kind):
    if kind not in heuristic_models:
        raise ValidationError(f'unknown heuristic [{kind}], valid choices: {HEURISTIC_KINDS}')
    u, v = g.check_node(u), g.check_node(v)
    if u == v:
        raise ValidationError('heuristics need two distinct nodes')
    common = np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)
    return heuristic_models[kind](g, u, v, common.tolist())


def heuristic_scores(g, pairs, kind):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.array([heuristic_score(g, u, v, kind) for u, v in pairs], dtype=np.float64)


def heuristic_rank(g, pos, neg, kind):
    """
    Score candidates with a heuristic and package them for the metrics module.
    :param neg: (m, 2) shared negatives, or (P, K, 2) per-positive negatives
    """
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64)
    if not len(pos) or not neg.size:
        raise ValidationError('heuristic_rank needs non-empty candidate lists')
    pos_scores = heuristic_scores(g, pos, kind)
    if neg.ndim == 3:
        per_pos = heuristic_scores(g, neg.reshape(-1, 2), kind).reshape(neg.shape[0], neg.shape[1])
        return RankingResult(pos_scores, per_pos_neg_scores=list(per_pos))
    return RankingResult(pos_scores, shared_neg_scores=heuristic_scores(g, neg, kind))
