# -*- coding: utf-8 -*-
import numpy as np
import pytest
from scipy import stats

from conftest import make_graph
from utils.dataset_util import generate_graph
from utils.error_util import SamplingError, ValidationError
from utils.sampler_util import (ExcludedPairs, NegativeSampler, SamplerConfig, sample_global, sample_local,
                                sample_local_batch, share_negatives, walk_augment)


def test_global_complete_graph_fails(triangle, rng):
    with pytest.raises(SamplingError):
        sample_global(triangle, 5, rng)


def test_global_only_non_edges():
    g = make_graph(3, [(0, 1), (1, 2)])
    out = sample_global(g, 200, np.random.default_rng(1))
    assert {tuple(sorted(p)) for p in out.tolist()} == {(0, 2)}


def test_global_never_self_pairs():
    g = make_graph(100, [])
    out = sample_global(g, 10 ** 4, np.random.default_rng(2))
    assert not np.any(out[:, 0] == out[:, 1])


def test_global_uniform_over_non_edges(path4):
    out = sample_global(path4, 10 ** 5, np.random.default_rng(3))
    non_edges = [(u, v) for u in range(4) for v in range(4) if u != v and not path4.has_edge(u, v)]
    counts = np.array([np.sum((out[:, 0] == u) & (out[:, 1] == v)) for u, v in non_edges])
    assert counts.sum() == 10 ** 5
    assert stats.chisquare(counts).pvalue > 0.01


def test_samplers_never_emit_edges_or_self_pairs():
    g = generate_graph('sbm', 100, seed=0, n_blocks=2, p_in=0.2, p_out=0.02)
    rng = np.random.default_rng(4)
    draws = sample_global(g, 10 ** 6, rng)
    assert not np.any(draws[:, 0] == draws[:, 1])
    assert not g.has_edges(draws[:, 0], draws[:, 1]).any()

    pos = g.edge_pairs()
    pos = pos[rng.integers(len(pos), size=10 ** 6)]
    local = sample_local_batch(g, pos, rng, degree_power=0.75)
    assert not np.any(local[:, 0] == local[:, 1])
    assert not g.has_edges(local[:, 0], local[:, 1]).any()


def test_excluded_pairs_respected(path4, rng):
    exclude = ExcludedPairs(4, [(0, 2)], symmetric=True)
    out = sample_global(path4, 5000, rng, exclude)
    assert not exclude.contains(out[:, 0], out[:, 1]).any()


def test_local_uniform_over_non_neighbors():
    g = make_graph(8, [(0, 1), (0, 2), (3, 4), (5, 6)])
    rng = np.random.default_rng(5)
    out = sample_local_batch(g, np.tile([[0, 1]], (10 ** 4, 1)), rng, 0.0, coin=False)
    assert np.all(out[:, 0] == 0)
    counts = np.bincount(out[:, 1], minlength=8)
    assert counts[[0, 1, 2]].sum() == 0
    assert stats.chisquare(counts[3:]).pvalue > 0.01


def test_local_anchor_adjacent_to_all(star3, rng):
    with pytest.raises(SamplingError):
        sample_local(star3, (0, 1), rng, coin=False)


def test_local_degree_power():
    g = make_graph(5, [(0, 2), (1, 2), (3, 4)])
    rng = np.random.default_rng(6)
    out = sample_local_batch(g, np.tile([[3, 4]], (2 * 10 ** 4, 1)), rng, 1.0, coin=False)
    counts = np.bincount(out[:, 1], minlength=5)[:3]
    expected = counts.sum() * np.array([0.25, 0.25, 0.5])
    assert stats.chisquare(counts, expected).pvalue > 0.01


def test_local_coin_picks_either_endpoint(rng):
    g = make_graph(10, [(0, 1)])
    out = sample_local_batch(g, np.tile([[0, 1]], (2000, 1)), rng)
    anchors = set(out[:, 0].tolist())
    assert anchors == {0, 1}


def test_share_negatives_counts(rng):
    pos = np.array([[0, 1], [1, 2], [2, 3], [3, 4]])
    neg = np.array([[0, 5], [1, 6], [2, 7], [3, 8]])
    pairs = share_negatives(pos, neg, 3, rng)
    assert len(pairs) == 12
    assert np.bincount(pairs.neg_index).tolist() == [3, 3, 3, 3]
    assert np.bincount(pairs.pos_index).tolist() == [3, 3, 3, 3]

    identity = share_negatives(pos, neg, 1, rng)
    assert identity.neg_index.tolist() == [0, 1, 2, 3]
    assert [p.neg for p in identity] == [tuple(n) for n in neg.tolist()]

    three = share_negatives(pos[:3], neg[:3], 2, rng)
    assert np.bincount(three.neg_index).tolist() == [2, 2, 2]

    with pytest.raises(ValidationError):
        share_negatives(pos, neg[:3], 2, rng)


def test_walk_augment_one_step_adds_nothing(path4, rng):
    aug = walk_augment(path4, 1, rng)
    assert aug.pairs.tolist() == path4.edge_pairs().tolist()
    assert aug.weights.tolist() == [1.0, 1.0, 1.0]


def test_walk_augment_step_weights(rng):
    g = make_graph(3, [(0, 1), (1, 2)], directed=True)
    assert walk_augment(g, 2, rng).as_dict() == {(0, 1): 1.0, (0, 2): 0.5, (1, 2): 1.0}


def test_walk_augment_keeps_max_weight(rng):
    # 0->2 is reachable at step 1 directly and at step 2 through 1, but is not a base pair
    g = make_graph(3, [(0, 1), (1, 2), (0, 2)], directed=True)
    aug = walk_augment(g, 2, rng, walks_per_node=20, base_pairs=[(0, 1), (1, 2)])
    assert aug.as_dict() == {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0}


def test_walk_augment_keeps_base_margins(rng):
    g = make_graph(3, [(0, 1), (1, 2)], weights=[1.0, 4.0])
    aug = walk_augment(g, 1, rng, base_pairs=[(0, 1), (1, 2)], base_weights=[0.25, 1.0])
    assert aug.as_dict() == {(0, 1): 0.25, (1, 2): 1.0}
    longer = walk_augment(g, 3, rng, walks_per_node=10, base_pairs=[(0, 1), (1, 2)], base_weights=[0.25, 1.0])
    assert longer.as_dict()[(0, 1)] == 0.25
    assert longer.as_dict()[(0, 2)] == 0.5


def test_walk_augment_on_sbm_benchmark():
    g = generate_graph('sbm', 400, seed=0, n_blocks=2, p_in=0.1, p_out=0.01)
    aug = walk_augment(g, 10, np.random.default_rng(0))
    weights = aug.as_dict()
    assert all(0 < w <= 1 for w in weights.values())
    assert all(weights[(int(u), int(v))] == 1.0 for u, v in g.edge_pairs())
    assert len(aug) > g.num_edges


def test_negative_sampler_pairs(path4):
    sampler = NegativeSampler(path4, SamplerConfig('global', num_neg=2), np.random.default_rng(0))
    pairs = sampler.training_pairs(path4.edge_pairs())
    assert len(pairs) == 6
    neg = pairs.neg_pairs()
    assert not path4.has_edges(neg[:, 0], neg[:, 1]).any()
