# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from utils.diffmath_util import Tensor
from utils.error_util import ConfigError, DimensionError, UndefinedMetricError, ValidationError
from utils.objective_util import LossConfig, TrainingPair, cross_entropy_loss, empirical_auc, pairwise_loss


@pytest.mark.parametrize('kind,pos,neg,gamma,expected', [
    ('auc', 1.0, 0.0, None, 0.0),
    ('auc', 0.3, 0.5, None, 1.44),
    ('hinge_auc', 2.0, 0.5, None, 0.0),
    ('hinge_auc', 0.3, 0.5, None, 1.44),
    ('weighted_hinge_auc', 0.6, 0.0, 0.5, 0.0),
    ('weighted_hinge_auc', 0.4, 0.4, 1.0, 1.0),
    ('weighted_hinge_auc', 0.0, 0.0, 0.8, 0.8 ** 3),
])
def test_pairwise_loss_values(kind, pos, neg, gamma, expected):
    gammas = None if gamma is None else [gamma]
    value = pairwise_loss([pos], [neg], gammas, kind).item()
    assert value == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_pairwise_loss_is_mean_over_pairs():
    value = pairwise_loss([1.0, 0.3], [0.0, 0.5], kind='auc').item()
    assert value == pytest.approx(0.72, rel=1e-12)


def test_pairwise_loss_errors():
    with pytest.raises(DimensionError):
        pairwise_loss([1.0, 2.0], [0.0], kind='auc')
    with pytest.raises(DimensionError, match=r'\(2,\)'):
        pairwise_loss([1.0, 2.0], [0.0], kind='hinge_auc')
    with pytest.raises(DimensionError):
        cross_entropy_loss(Tensor(np.ones((2, 2))), [0.0])
    with pytest.raises(ValidationError):
        pairwise_loss([1.0], [0.0], [1.5], kind='weighted_hinge_auc')
    with pytest.raises(ValidationError):
        TrainingPair((0, 1), (0, 2), 0.0)


def test_cross_entropy():
    ln2 = math.log(2.0)
    assert cross_entropy_loss([0.0], [-800.0]).item() == pytest.approx(ln2, rel=1e-12)
    assert cross_entropy_loss([40.0], [-40.0]).item() == pytest.approx(0.0, abs=1e-15)
    assert cross_entropy_loss([800.0], [0.0]).item() == pytest.approx(ln2, rel=1e-12)


def test_loss_config_cross_reference():
    with pytest.raises(ConfigError):
        LossConfig('weighted_hinge_auc').validate(has_gammas=False)
    with pytest.raises(ConfigError):
        LossConfig('softmax').validate()
    assert LossConfig('weighted_hinge_auc').validate(has_gammas=True).kind == 'weighted_hinge_auc'


def test_empirical_auc():
    assert empirical_auc([0.9, 0.4], [0.5, 0.1]) == 0.75
    assert empirical_auc([3.0, 4.0], [1.0, 2.0]) == 1.0
    assert empirical_auc([0.5, 0.5], [0.5, 0.5]) == 0.0
    with pytest.raises(UndefinedMetricError):
        empirical_auc([], [0.1])


def test_empirical_auc_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        pos = rng.integers(0, 10, size=rng.integers(1, 40)).astype(float)
        neg = rng.integers(0, 10, size=rng.integers(1, 40)).astype(float)
        brute = sum(p > n for p in pos for n in neg) / (len(pos) * len(neg))
        assert empirical_auc(pos, neg) == brute


@pytest.mark.parametrize('kind', ['auc', 'hinge_auc', 'weighted_hinge_auc'])
@pytest.mark.parametrize('shift', [-3.0, 0.25, 10.0])
def test_pairwise_loss_ignores_a_common_shift(kind, shift, rng):
    pos, neg = rng.normal(size=20), rng.normal(size=20)
    gammas = rng.uniform(0.1, 1.0, size=20)
    base = pairwise_loss(pos, neg, gammas, kind=kind).item()
    moved = pairwise_loss(pos + shift, neg + shift, gammas, kind=kind).item()
    assert moved == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_hinge_loss_is_zero_exactly_when_every_margin_holds(rng):
    for _ in range(50):
        pos, neg = rng.normal(size=6), rng.normal(size=6)
        loss = pairwise_loss(pos, neg, kind='hinge_auc').item()
        assert (loss == 0.0) == bool(np.all(pos - neg >= 1.0))
    assert pairwise_loss([2.0, 1.5], [1.0, 0.5], kind='hinge_auc').item() == 0.0
    assert pairwise_loss([2.0, 1.5], [1.0, 0.6], kind='hinge_auc').item() > 0.0
