# -*- coding: utf-8 -*-
"""
Node neighborhood encoders: full-graph GCN / SAGE message passing over node
inputs built from features, trainable embeddings, or both.
"""
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy import sparse

from utils.diffmath_util import Tensor, add, concat, constant, dropout, gather, matmul, relu, spmm
from utils.error_util import ConfigError, DimensionError
from utils.graph_util import NodeFeatures

ENCODER_KINDS = ('gcn', 'sage', 'embedding_only')
NODE_INPUTS = ('features', 'embedding', 'concat')
EMBEDDING_STD = 0.1


@dataclass
class EncoderConfig:
    kind: str = 'sage'
    num_layers: int = 2
    hidden_dim: int = 64
    dropout: float = 0.0
    node_input: str = 'embedding'
    embedding_dim: int = 64

    def validate(self, has_features=True):
        if self.kind not in ENCODER_KINDS:
            raise ConfigError('encoder', f'must be one of {ENCODER_KINDS}, got [{self.kind}]')
        if self.node_input not in NODE_INPUTS:
            raise ConfigError('node_input', f'must be one of {NODE_INPUTS}, got [{self.node_input}]')
        if self.num_layers < 0 or (self.num_layers == 0 and self.kind != 'embedding_only'):
            raise ConfigError('encoder_layers', f'must be >= 1 for {self.kind}, got {self.num_layers}')
        if self.hidden_dim < 1:
            raise ConfigError('hidden_dim', f'must be >= 1, got {self.hidden_dim}')
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError('encoder_dropout', f'must be in [0, 1), got {self.dropout}')
        if self.node_input != 'features' and self.embedding_dim < 1:
            raise ConfigError('embedding_dim', f'must be >= 1, got {self.embedding_dim}')
        if self.node_input in ('features', 'concat') and not has_features:
            raise ConfigError('feature_path', f'node_input={self.node_input} needs node features')
        return self

    def input_dim(self, feat_dim=0):
        return {
            'features': feat_dim,
            'embedding': self.embedding_dim,
            'concat': feat_dim + self.embedding_dim,
        }[self.node_input]

    def output_dim(self, feat_dim=0):
        return self.input_dim(feat_dim) if self.kind == 'embedding_only' else self.hidden_dim


class NormalizedAdjacency(object):

    def __init__(self, kind, matrix):
        self.kind = kind
        self.matrix = matrix


@runtime_checkable
class EdgeNeighborhoodEncoder(Protocol):
    """Contract for encoders that map a node-pair subgraph (utils.graph_util.Subgraph) to one vector."""

    def encode_pair(self, subgraph, store, mode) -> Tensor:
        ...


def glorot(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def build_normalized_adjacency(g, kind):
    """
    gcn: D^-1/2 (A + I) D^-1/2 with D the degree of A + I.
    sage: row-mean operator D^-1 A over true neighbors; rows of isolated nodes stay zero.
    """
    adj = g.adjacency()
    n = g.num_nodes
    if kind == 'gcn':
        adj = adj + sparse.identity(n, format='csr')
        deg = np.asarray(adj.sum(axis=1)).reshape(-1)
        d_inv_sqrt = sparse.diags(1.0 / np.sqrt(deg))
        matrix = (d_inv_sqrt @ adj @ d_inv_sqrt).tocsr()
    elif kind == 'sage':
        deg = np.asarray(adj.sum(axis=1)).reshape(-1)
        inv = np.zeros(n)
        inv[deg > 0] = 1.0 / deg[deg > 0]
        matrix = (sparse.diags(inv) @ adj).tocsr()
    else:
        return None
    matrix.sort_indices()
    return NormalizedAdjacency(kind, matrix)


def init_encoder_params(store, cfg, num_nodes, feat_dim, rng):
    if cfg.node_input in ('embedding', 'concat'):
        store.add('emb', rng.normal(0.0, EMBEDDING_STD, size=(num_nodes, cfg.embedding_dim)))
    if cfg.kind == 'embedding_only':
        return
    width = cfg.input_dim(feat_dim)
    for layer in range(cfg.num_layers):
        if cfg.kind == 'gcn':
            store.add(f'enc.{layer}.weight', glorot(rng, width, cfg.hidden_dim))
        else:
            store.add(f'enc.{layer}.self', glorot(rng, width, cfg.hidden_dim))
            store.add(f'enc.{layer}.neigh', glorot(rng, width, cfg.hidden_dim))
        width = cfg.hidden_dim


def compose_node_input(g, feats, store, cfg):
    parts = []
    if cfg.node_input in ('features', 'concat'):
        if feats is None:
            raise ConfigError('feature_path', f'node_input={cfg.node_input} needs node features')
        x = feats if isinstance(feats, Tensor) else constant(feats.values)
        if x.shape[0] != g.num_nodes:
            raise DimensionError('node features', x.shape, (g.num_nodes, x.shape[1]))
        parts.append(x)
    if cfg.node_input in ('embedding', 'concat'):
        if 'emb' not in store:
            raise ConfigError('node_input', 'embedding table missing from the parameter store')
        parts.append(gather(store['emb'], np.arange(g.num_nodes)))
    return parts[0] if len(parts) == 1 else concat(*parts)


def _layer_weight(store, name, width, cfg):
    w = store[name]
    if w.shape != (width, cfg.hidden_dim):
        raise DimensionError(name, w.shape, (width, cfg.hidden_dim))
    return w


def encode(g, feats, store, cfg, mode='eval', adj=None, rng=None):
    h = compose_node_input(g, feats, store, cfg)
    if cfg.kind == 'embedding_only':
        return h
    if adj is None or adj.kind != cfg.kind:
        adj = build_normalized_adjacency(g, cfg.kind)

    training = mode == 'train'
    for layer in range(cfg.num_layers):
        width = h.shape[1]
        if cfg.kind == 'gcn':
            h = spmm(adj.matrix, matmul(h, _layer_weight(store, f'enc.{layer}.weight', width, cfg)))
        else:
            h_self = matmul(h, _layer_weight(store, f'enc.{layer}.self', width, cfg))
            h_neigh = matmul(spmm(adj.matrix, h), _layer_weight(store, f'enc.{layer}.neigh', width, cfg))
            h = add(h_self, h_neigh)
        if layer < cfg.num_layers - 1:
            h = dropout(relu(h), cfg.dropout, training, rng)
    return h


class NodeEncoder(object):
    """Binds a graph, its normalized operator and optional features to one EncoderConfig."""

    def __init__(self, graph, cfg, feats=None):
        self.graph = graph
        self.cfg = cfg.validate(has_features=feats is not None)
        self.feats = feats
        self.adj = build_normalized_adjacency(graph, cfg.kind)

    @property
    def feat_dim(self):
        if self.feats is None:
            return 0
        return self.feats.dim if isinstance(self.feats, NodeFeatures) else self.feats.shape[1]

    @property
    def output_dim(self):
        return self.cfg.output_dim(self.feat_dim)

    def init_params(self, store, rng):
        init_encoder_params(store, self.cfg, self.graph.num_nodes, self.feat_dim, rng)

    def __call__(self, store, mode='eval', rng=None):
        return encode(self.graph, self.feats, store, self.cfg, mode, self.adj, rng)
