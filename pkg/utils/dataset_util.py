# -*- coding: utf-8 -*-
"""Edge splits, provided split files and synthetic graph generators."""
from collections import namedtuple

import networkx as nx
import numpy as np

from utils.error_util import ConfigError, ValidationError
from utils.graph_util import Graph, load_edge_list, load_features, parse_edge_lines
from utils.other_utils import atomic_open, logger, read_text_lines

EdgeSplit = namedtuple('EdgeSplit', ['train', 'valid', 'test', 'train_graph', 'full_graph'])


def _graph_from_pairs(g, pairs):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    weights = g.pair_weights(pairs) if g.edge_weights is not None else None
    return Graph.from_edges(g.num_nodes, pairs[:, 0], pairs[:, 1], weights,
                            directed=g.directed, node_tokens=g.node_tokens)


def split_edges(g, fractions, rng):
    """Uniform random partition of the edges into train/valid/test; the training graph holds train edges only."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError(f'split fractions must be three positive numbers summing to 1, got {fractions}')
    pairs = g.edge_pairs()
    n = len(pairs)
    n_valid = int(round(fractions[1] * n))
    n_test = int(round(fractions[2] * n))
    n_train = n - n_valid - n_test
    if min(n_train, n_valid, n_test) <= 0:
        raise ValidationError(f'split of {n} edges into {n_train}/{n_valid}/{n_test} leaves an empty part')

    perm = rng.permutation(n)
    train = pairs[np.sort(perm[:n_train])]
    valid = pairs[np.sort(perm[n_train:n_train + n_valid])]
    test = pairs[np.sort(perm[n_train + n_valid:])]
    return EdgeSplit(train, valid, test, _graph_from_pairs(g, train), g)


def load_split_pairs(path, graph):
    """Read a valid/test edge file whose tokens must all exist in `graph`."""
    pairs = []
    for line_no, a, b, _ in parse_edge_lines(read_text_lines(path), path):
        try:
            pairs.append((graph.token_to_id(a), graph.token_to_id(b)))
        except KeyError as e:
            raise ValidationError(f'{path}:{line_no}: node {e} is not in the training graph')
    pairs = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if not graph.directed:
        pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0)


def provided_split(train_graph, valid_path, test_path):
    valid = load_split_pairs(valid_path, train_graph)
    test = load_split_pairs(test_path, train_graph)
    for name, pairs in (('valid', valid), ('test', test)):
        if not len(pairs):
            raise ValidationError(f'{name} split is empty')
        if train_graph.has_edges(pairs[:, 0], pairs[:, 1]).any():
            raise ValidationError(f'{name} split shares edges with the training graph')
    train = train_graph.edge_pairs()
    full = _graph_from_pairs(train_graph, np.concatenate([train, valid, test]))
    return EdgeSplit(train, valid, test, train_graph, full)


def merge_valid_into_train(split):
    """Train on validation edges too; validation still drives model selection."""
    train = np.concatenate([split.train, split.valid])
    return split._replace(train=train, train_graph=_graph_from_pairs(split.full_graph, train))


def sbm_graph(n_nodes, n_blocks, p_in, p_out, seed=0):
    sizes = [n_nodes // n_blocks] * n_blocks
    for i in range(n_nodes % n_blocks):
        sizes[i] += 1
    prob_matrix = np.full((n_blocks, n_blocks), p_out)
    np.fill_diagonal(prob_matrix, p_in)
    nx_graph = nx.stochastic_block_model(sizes=sizes, p=prob_matrix.tolist(), seed=seed)
    return from_networkx(nx_graph)


def ba_graph(n_nodes, m, seed=0):
    return from_networkx(nx.barabasi_albert_graph(n_nodes, m, seed=seed))


def from_networkx(nx_graph):
    nodes = sorted(nx_graph.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    edges = np.array([(index[u], index[v]) for u, v in nx_graph.edges()], dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(len(nodes), edges[:, 0], edges[:, 1], directed=nx_graph.is_directed(),
                            node_tokens=[str(v) for v in nodes])


def generate_graph(kind, n_nodes, seed=0, n_blocks=2, p_in=0.1, p_out=0.01, m=3):
    if kind == 'sbm':
        graph = sbm_graph(n_nodes, n_blocks, p_in, p_out, seed)
    elif kind == 'ba':
        graph = ba_graph(n_nodes, m, seed)
    else:
        raise ValidationError(f'unknown generator [{kind}], valid choices: sbm, ba')
    logger.info(f'Generated {kind} {graph}')
    return graph


def write_edge_list(graph, path, header=None):
    with atomic_open(path, 'w') as f:
        if header:
            f.write(f'# {header}\n')
        pairs = graph.edge_pairs()
        weights = graph.pair_weights(pairs) if graph.edge_weights is not None else None
        for i, (u, v) in enumerate(pairs):
            line = f'{graph.node_tokens[u]} {graph.node_tokens[v]}'
            if weights is not None:
                line += f' {weights[i]!r}'
            f.write(line + '\n')


def load_graph(cfg):
    """Graph and optional node features named by an ExperimentConfig."""
    if cfg.graph_path is not None:
        graph = load_edge_list(cfg.graph_path, directed=cfg.directed)
    elif cfg.generator is not None:
        graph = generate_graph(cfg.generator, cfg.gen_nodes, cfg.gen_seed, cfg.gen_blocks,
                               cfg.gen_p_in, cfg.gen_p_out, cfg.gen_ba_m)
    else:
        raise ConfigError('graph_path', 'no graph source: set graph_path or generator')
    if cfg.use_edge_weights and graph.edge_weights is None:
        raise ConfigError('use_edge_weights', 'the graph carries no edge weights')
    feats = load_features(cfg.feature_path, graph) if cfg.feature_path is not None else None
    return graph, feats
