# -*- coding: utf-8 -*-
"""
Negative samplers, negative-sample sharing and random-walk positive augmentation.

Negatives are "assumed negative": a sampled pair is only checked against the
edges the sampler is given, never against held-out links unless they are passed
in through `exclude`.
"""
from dataclasses import dataclass

import numpy as np

from utils.error_util import ConfigError, SamplingError, ValidationError
from utils.graph_util import degrees, random_walk
from utils.objective_util import TrainingPair

SAMPLER_STRATEGIES = ('global', 'local')
MAX_ATTEMPTS_PER_SAMPLE = 1000


@dataclass
class SamplerConfig:
    strategy: str = 'global'
    num_neg: int = 1
    degree_power: float = 0.0
    seed: int = 0

    def validate(self):
        if self.strategy not in SAMPLER_STRATEGIES:
            raise ConfigError('sampler', f'must be one of {SAMPLER_STRATEGIES}, got [{self.strategy}]')
        if self.num_neg < 1:
            raise ConfigError('num_neg', f'must be >= 1, got {self.num_neg}')
        if self.degree_power < 0:
            raise ConfigError('degree_power', f'must be >= 0, got {self.degree_power}')
        return self


class ExcludedPairs(object):
    """Sorted u*N+v keys of arcs a sampler must never emit, on top of the graph's own arcs."""

    def __init__(self, num_nodes, pairs=None, symmetric=True):
        self.num_nodes = num_nodes
        keys = np.zeros(0, dtype=np.int64)
        if pairs is not None and len(pairs):
            pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
            keys = pairs[:, 0] * num_nodes + pairs[:, 1]
            if symmetric:
                keys = np.concatenate([keys, pairs[:, 1] * num_nodes + pairs[:, 0]])
        self.keys = np.unique(keys)

    def contains(self, src, dst):
        keys = np.asarray(src, dtype=np.int64) * self.num_nodes + np.asarray(dst, dtype=np.int64)
        if not len(self.keys):
            return np.zeros(keys.shape, dtype=bool)
        pos = np.minimum(np.searchsorted(self.keys, keys), len(self.keys) - 1)
        return self.keys[pos] == keys

    def __len__(self):
        return len(self.keys)


def _rejected(g, src, dst, exclude):
    bad = (src == dst) | g.has_edges(src, dst)
    if exclude is not None:
        bad |= exclude.contains(src, dst)
    return bad


def sample_global(g, m, rng, exclude=None):
    """m pairs drawn uniformly from V x V minus observed arcs and self-pairs."""
    n = g.num_nodes
    extra = len(exclude) if exclude is not None else 0
    if n * (n - 1) - g.num_arcs - extra <= 0:
        raise SamplingError('graph is complete, there is no non-edge to sample')
    if m <= 0:
        return np.zeros((0, 2), dtype=np.int64)

    out = np.zeros((m, 2), dtype=np.int64)
    todo = np.arange(m)
    attempts = 0
    while len(todo):
        if attempts >= MAX_ATTEMPTS_PER_SAMPLE * m:
            raise SamplingError(f'rejection sampling gave up after {attempts} attempts, the graph is near-complete')
        src = rng.integers(n, size=len(todo))
        dst = rng.integers(n, size=len(todo))
        attempts += len(todo)
        ok = ~_rejected(g, src, dst, exclude)
        out[todo[ok], 0] = src[ok]
        out[todo[ok], 1] = dst[ok]
        todo = todo[~ok]
    return out


def degree_distribution(g, degree_power):
    weights = degrees(g).astype(np.float64) ** degree_power
    total = weights.sum()
    if total <= 0:
        raise SamplingError('no node has a positive sampling weight')
    return weights / total


def sample_local_batch(g, pos, rng, degree_power=0.0, exclude=None, coin=None, probs=None):
    """
    Corrupt one endpoint of every positive pair. The kept endpoint (anchor) is the
    first element, or a fair coin's pick when `coin` is true (default: undirected graphs).
    The replacement is drawn with probability proportional to degree**degree_power.
    """
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    m = len(pos)
    if coin is None:
        coin = not g.directed
    if probs is None:
        probs = degree_distribution(g, degree_power)
    anchors = pos[:, 0].copy()
    if coin:
        flip = rng.random(m) < 0.5
        anchors[flip] = pos[flip, 1]

    # an anchor is impossible when every positive-weight node is itself or a neighbor
    support = probs > 0
    for a in np.unique(anchors):
        nb = g.indices[g.indptr[a]:g.indptr[a + 1]]
        free = support.sum() - support[nb].sum() - support[a]
        if free <= 0:
            raise SamplingError(f'anchor node {a} is adjacent to every candidate node')

    out = np.stack([anchors, np.zeros(m, dtype=np.int64)], axis=1)
    todo = np.arange(m)
    attempts = 0
    while len(todo):
        if attempts >= MAX_ATTEMPTS_PER_SAMPLE * max(m, 1):
            raise SamplingError(f'local sampling gave up after {attempts} attempts')
        cand = rng.choice(g.num_nodes, size=len(todo), p=probs)
        attempts += len(todo)
        ok = ~_rejected(g, anchors[todo], cand, exclude)
        out[todo[ok], 1] = cand[ok]
        todo = todo[~ok]
    return out


def sample_local(g, pos, rng, degree_power=0.0, exclude=None, coin=None):
    return tuple(int(x) for x in sample_local_batch(g, [pos], rng, degree_power, exclude, coin)[0])


class TrainingPairs(object):
    """
    m*num_neg training pairs stored as index arrays into the m positives and m negatives
    they were built from, so scores can be computed once per sample and gathered.
    """

    def __init__(self, pos, neg, pos_index, neg_index, gammas):
        self.pos = pos
        self.neg = neg
        self.pos_index = pos_index
        self.neg_index = neg_index
        self.gammas = gammas

    def __len__(self):
        return len(self.pos_index)

    def pos_pairs(self):
        return self.pos[self.pos_index]

    def neg_pairs(self):
        return self.neg[self.neg_index]

    def pair_gammas(self):
        return self.gammas[self.pos_index]

    def __iter__(self):
        for i, j in zip(self.pos_index, self.neg_index):
            yield TrainingPair(tuple(int(x) for x in self.pos[i]), tuple(int(x) for x in self.neg[j]),
                               float(self.gammas[i]))


def share_negatives(pos, neg, num_neg, rng, gammas=None):
    """Identity pairing plus num_neg-1 pairings under random permutations of the negatives."""
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 2)
    if len(pos) != len(neg):
        raise ValidationError(f'need as many negatives as positives, got {len(pos)} and {len(neg)}')
    if num_neg < 1:
        raise ValidationError(f'num_neg must be >= 1, got {num_neg}')
    m = len(pos)
    gammas = np.ones(m) if gammas is None else np.asarray(gammas, dtype=np.float64).reshape(-1)
    pos_index = np.tile(np.arange(m), num_neg)
    neg_index = np.concatenate([np.arange(m)] + [rng.permutation(m) for _ in range(num_neg - 1)])
    return TrainingPairs(pos, neg, pos_index, neg_index, gammas)


class AugmentedEdgeSet(object):

    def __init__(self, pairs, weights):
        self.pairs = pairs
        self.weights = weights

    def __len__(self):
        return len(self.pairs)

    def as_dict(self):
        return {(int(u), int(v)): float(w) for (u, v), w in zip(self.pairs, self.weights)}


def walk_augment(g, walk_length, rng, walks_per_node=1, base_pairs=None, base_weights=None):
    """
    Add (start, node at step s) pairs from random walks with weight 1/s.
    Base pairs keep their own weight (1 by default) whatever the walks find;
    a pair found only by walks keeps the maximum over the steps it was reached at.
    """
    if walk_length < 1:
        raise ValidationError(f'walk length must be >= 1, got {walk_length}')
    if base_pairs is None:
        base_pairs = g.edge_pairs()
    base_pairs = np.asarray(base_pairs, dtype=np.int64).reshape(-1, 2)
    if base_weights is None:
        base_weights = np.ones(len(base_pairs))

    def key(u, v):
        return (u, v) if g.directed or u < v else (v, u)

    merged = {key(int(u), int(v)): float(w) for (u, v), w in zip(base_pairs, base_weights)}
    base = set(merged)
    for _ in range(walks_per_node):
        for start in range(g.num_nodes):
            for step, node in enumerate(random_walk(g, start, walk_length, rng), start=1):
                if node == start:
                    continue
                k = key(start, node)
                if k in base:
                    continue
                w = 1.0 / step
                if merged.get(k, 0.0) < w:
                    merged[k] = w

    keys = sorted(merged)
    pairs = np.array(keys, dtype=np.int64).reshape(-1, 2)
    weights = np.array([merged[k] for k in keys], dtype=np.float64)
    return AugmentedEdgeSet(pairs, weights)


class NegativeSampler(object):
    """Seeded sampler bound to one training graph; draws one negative per positive."""

    def __init__(self, graph, cfg, rng=None, exclude=None):
        self.graph = graph
        self.cfg = cfg.validate()
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.exclude = exclude
        self._probs = degree_distribution(graph, cfg.degree_power) if cfg.strategy == 'local' else None

    def draw(self, pos):
        if self.cfg.strategy == 'global':
            return sample_global(self.graph, len(pos), self.rng, self.exclude)
        return sample_local_batch(self.graph, pos, self.rng, self.cfg.degree_power, self.exclude, probs=self._probs)

    def training_pairs(self, pos, gammas=None):
        neg = self.draw(pos)
        return share_negatives(pos, neg, self.cfg.num_neg, self.rng, gammas)
