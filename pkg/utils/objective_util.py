# -*- coding: utf-8 -*-
"""
Pairwise AUC-surrogate losses and the cross-entropy baseline.

All pairwise losses take row-aligned (n, 1) score tensors for the positive and
negative side of each training pair and reduce with the mean. L2 regularization
is applied by `optimizer_step` as weight decay, not here.
"""
from dataclasses import dataclass

import numpy as np

from utils.diffmath_util import Tensor, add, add_scalar, clamp_min, constant, mean, mul, scale, softplus, square, sub
from utils.error_util import ConfigError, DimensionError, UndefinedMetricError, ValidationError

LOSS_KINDS = ('auc', 'hinge_auc', 'weighted_hinge_auc', 'cross_entropy')
PAIRWISE_KINDS = ('auc', 'hinge_auc', 'weighted_hinge_auc')


@dataclass(frozen=True)
class TrainingPair:
    pos: tuple
    neg: tuple
    gamma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f'gamma must be in (0, 1], got {self.gamma}')


@dataclass
class LossConfig:
    kind: str = 'auc'
    lam: float = 0.0

    def validate(self, has_gammas=True):
        if self.kind not in LOSS_KINDS:
            raise ConfigError('loss', f'must be one of {LOSS_KINDS}, got [{self.kind}]')
        if self.lam < 0:
            raise ConfigError('l2_lambda', f'must be >= 0, got {self.lam}')
        if self.kind == 'weighted_hinge_auc' and not has_gammas:
            raise ConfigError('loss', 'weighted_hinge_auc needs per-pair margins (walk_aug or use_edge_weights)')
        return self


def _shape(x):
    return x.shape if isinstance(x, Tensor) else np.shape(x)


def _as_column(x):
    if isinstance(x, Tensor):
        return x if x.shape[1] == 1 else None
    return constant(np.asarray(x, dtype=np.float64).reshape(-1, 1))


def pairwise_loss(pos_scores, neg_scores, gammas=None, kind='auc'):
    if kind not in PAIRWISE_KINDS:
        raise ConfigError('loss', f'[{kind}] is not a pairwise loss')
    pos, neg = _as_column(pos_scores), _as_column(neg_scores)
    if pos is None or neg is None or pos.shape != neg.shape:
        raise DimensionError(f'{kind} loss', _shape(pos_scores), _shape(neg_scores))

    # neg - pos, the term every surrogate is built on
    diff = sub(neg, pos)
    if kind == 'auc':
        return mean(square(add_scalar(diff, 1.0)))
    if kind == 'hinge_auc':
        return mean(square(clamp_min(add_scalar(diff, 1.0), 0.0)))
    # weighted_hinge_auc
    if gammas is None:
        gammas = np.ones(pos.shape[0])
    gammas = np.asarray(gammas, dtype=np.float64).reshape(-1, 1)
    if gammas.shape != pos.shape:
        raise DimensionError('weighted_hinge_auc gammas', gammas.shape, pos.shape)
    if np.any(gammas <= 0) or np.any(gammas > 1):
        raise ValidationError('gamma must be in (0, 1]')
    g = constant(gammas)
    return mean(mul(square(clamp_min(add(diff, g), 0.0)), g))


def cross_entropy_loss(pos_scores, neg_scores):
    """mean(-log sigmoid(s+)) + mean(-log(1 - sigmoid(s-))), both written as softplus."""
    pos, neg = _as_column(pos_scores), _as_column(neg_scores)
    if pos is None or neg is None:
        raise DimensionError('cross_entropy loss', _shape(pos_scores), _shape(neg_scores))
    return add(mean(softplus(scale(pos, -1.0))), mean(softplus(neg)))


def compute_loss(cfg, pos_scores, neg_scores, gammas=None):
    if cfg.kind == 'cross_entropy':
        return cross_entropy_loss(pos_scores, neg_scores)
    return pairwise_loss(pos_scores, neg_scores, gammas, cfg.kind)


def empirical_auc(pos_scores, neg_scores):
    """Fraction of (pos, neg) pairs with s+ > s- strictly; ties earn nothing."""
    pos = np.asarray(pos_scores, dtype=np.float64).reshape(-1)
    neg = np.sort(np.asarray(neg_scores, dtype=np.float64).reshape(-1))
    if not len(pos) or not len(neg):
        raise UndefinedMetricError('AUC needs at least one positive and one negative score')
    below = np.searchsorted(neg, pos, side='left')
    return float(below.sum()) / (len(pos) * len(neg))
