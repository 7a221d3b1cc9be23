# -*- coding: utf-8 -*-
import numpy as np

from utils.diffmath_util import ParameterStore, gather
from utils.encoder_util import NodeEncoder
from utils.predictor_util import init_predictor_params, score


class LinkModel(object):
    """Encoder + predictor sharing one ParameterStore."""

    def __init__(self, graph, enc_cfg, pred_cfg, feats=None, store=None):
        self.encoder = NodeEncoder(graph, enc_cfg, feats)
        self.pred_cfg = pred_cfg.validate(directed=graph.directed)
        self.store = store if store is not None else ParameterStore()

    @property
    def graph(self):
        return self.encoder.graph

    def init_params(self, rng):
        self.encoder.init_params(self.store, rng)
        init_predictor_params(self.store, self.pred_cfg, self.encoder.output_dim, rng)
        return self.store

    def embed(self, mode='eval', rng=None):
        return self.encoder(self.store, mode, rng)

    def score_pairs(self, h, pairs, mode='eval', rng=None):
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return score(gather(h, pairs[:, 0]), gather(h, pairs[:, 1]), self.pred_cfg, self.store, mode, rng)

    def predict(self, pairs, h=None, batch_size=65536):
        """Eval-mode scores of an (n, 2) pair array as a flat numpy vector."""
        if h is None:
            h = self.embed('eval')
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        out = [self.score_pairs(h, pairs[i:i + batch_size]).data.reshape(-1)
               for i in range(0, len(pairs), batch_size)]
        return np.concatenate(out) if out else np.zeros(0)
