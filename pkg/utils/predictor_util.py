# -*- coding: utf-8 -*-
"""Link score predictors over pairs of node representations. Scores are raw, unbounded reals."""
from dataclasses import dataclass

import numpy as np

from utils.diffmath_util import add, concat, dropout, matmul, mul, row_sum, relu
from utils.encoder_util import glorot
from utils.error_util import ConfigError, DimensionError
from utils.other_utils import logger

PREDICTOR_KINDS = ('dot', 'bilinear', 'mlp_hadamard', 'mlp_concat')
COMMUTATIVE_KINDS = ('dot', 'mlp_hadamard')


@dataclass
class PredictorConfig:
    kind: str = 'dot'
    mlp_layers: int = 2
    mlp_hidden: int = 64
    dropout: float = 0.0

    @property
    def is_mlp(self):
        return self.kind.startswith('mlp')

    def validate(self, directed=False):
        if self.kind not in PREDICTOR_KINDS:
            raise ConfigError('predictor', f'must be one of {PREDICTOR_KINDS}, got [{self.kind}]')
        if self.is_mlp:
            if self.mlp_layers < 1:
                raise ConfigError('mlp_layers', f'must be >= 1, got {self.mlp_layers}')
            if self.mlp_hidden < 1:
                raise ConfigError('mlp_hidden', f'must be >= 1, got {self.mlp_hidden}')
            if not 0.0 <= self.dropout < 1.0:
                raise ConfigError('predictor_dropout', f'must be in [0, 1), got {self.dropout}')
        if directed and self.kind in COMMUTATIVE_KINDS:
            logger.warning(f'predictor [{self.kind}] is commutative but the graph is directed, '
                           f'consider bilinear or mlp_concat')
        return self


def init_predictor_params(store, cfg, dim, rng):
    if cfg.kind == 'bilinear':
        store.add('pred.W', glorot(rng, dim, dim))
    elif cfg.is_mlp:
        width = dim if cfg.kind == 'mlp_hadamard' else 2 * dim
        for layer in range(cfg.mlp_layers):
            out = 1 if layer == cfg.mlp_layers - 1 else cfg.mlp_hidden
            store.add(f'pred.mlp.{layer}.weight', glorot(rng, width, out))
            store.add(f'pred.mlp.{layer}.bias', np.zeros((1, out)))
            width = out


def mlp(x, store, cfg, training, rng):
    for layer in range(cfg.mlp_layers):
        w = store[f'pred.mlp.{layer}.weight']
        if w.shape[0] != x.shape[1]:
            raise DimensionError(f'pred.mlp.{layer}', x.shape, w.shape)
        x = add(matmul(x, w), store[f'pred.mlp.{layer}.bias'])
        if layer < cfg.mlp_layers - 1:
            x = dropout(relu(x), cfg.dropout, training, rng)
    return x


def score(h_i, h_j, cfg, store, mode='eval', rng=None):
    """Score row-aligned pairs; returns an (n, 1) tensor, one score per row."""
    if h_i.shape != h_j.shape:
        raise DimensionError('score', h_i.shape, h_j.shape)
    training = mode == 'train'
    if cfg.kind == 'dot':
        return row_sum(mul(h_i, h_j))
    if cfg.kind == 'bilinear':
        w = store['pred.W']
        if w.shape != (h_i.shape[1], h_i.shape[1]):
            raise DimensionError('bilinear', h_i.shape, w.shape)
        return row_sum(mul(matmul(h_i, w), h_j))
    if cfg.kind == 'mlp_hadamard':
        return mlp(mul(h_i, h_j), store, cfg, training, rng)
    return mlp(concat(h_i, h_j), store, cfg, training, rng)
