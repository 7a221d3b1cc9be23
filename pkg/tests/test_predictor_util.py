# -*- coding: utf-8 -*-
import numpy as np
import pytest

from utils.diffmath_util import ParameterStore, Tensor
from utils.error_util import DimensionError
from utils.predictor_util import PredictorConfig, init_predictor_params, score


def test_dot():
    out = score(Tensor([[1, 2]]), Tensor([[3, -1]]), PredictorConfig('dot'), ParameterStore())
    assert out.data.tolist() == [[1.0]]


def test_bilinear_identity_equals_dot(rng):
    h_i, h_j = Tensor(rng.normal(size=(5, 4))), Tensor(rng.normal(size=(5, 4)))
    store = ParameterStore()
    store.add('pred.W', np.eye(4))
    bilinear = score(h_i, h_j, PredictorConfig('bilinear'), store)
    dot = score(h_i, h_j, PredictorConfig('dot'), store)
    assert np.array_equal(bilinear.data, dot.data)


def test_mlp_hadamard_zero_annihilates(rng):
    cfg = PredictorConfig('mlp_hadamard', mlp_layers=2, mlp_hidden=6)
    store = ParameterStore()
    init_predictor_params(store, cfg, 4, rng)
    store['pred.mlp.0.bias'].data[...] = rng.normal(size=(1, 6))
    zero = Tensor(np.zeros((3, 4)))
    out = score(Tensor(rng.normal(size=(3, 4))), zero, cfg, store)
    assert np.allclose(out.data, out.data[0, 0])


def test_mlp_concat_is_order_sensitive(rng):
    cfg = PredictorConfig('mlp_concat', mlp_layers=2, mlp_hidden=6)
    store = ParameterStore()
    init_predictor_params(store, cfg, 4, rng)
    a, b = Tensor(rng.normal(size=(1, 4))), Tensor(rng.normal(size=(1, 4)))
    assert score(a, b, cfg, store).item() != score(b, a, cfg, store).item()
    assert store['pred.mlp.1.weight'].shape == (6, 1)


def test_width_mismatch():
    with pytest.raises(DimensionError):
        score(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 4))), PredictorConfig('dot'), ParameterStore())


def test_commutative_predictor_on_directed_graph_warns(caplog):
    PredictorConfig('dot').validate(directed=True)
    assert 'commutative' in caplog.text


@pytest.mark.parametrize('kind', ['dot', 'mlp_hadamard'])
def test_commutative_predictors_are_symmetric(kind, rng):
    cfg = PredictorConfig(kind, mlp_layers=2, mlp_hidden=6)
    store = ParameterStore()
    init_predictor_params(store, cfg, 4, rng)
    a, b = Tensor(rng.normal(size=(8, 4))), Tensor(rng.normal(size=(8, 4)))
    assert np.array_equal(score(a, b, cfg, store).data, score(b, a, cfg, store).data)


def test_bilinear_is_asymmetric_in_general(rng):
    cfg = PredictorConfig('bilinear')
    store = ParameterStore()
    init_predictor_params(store, cfg, 4, rng)
    a, b = Tensor(rng.normal(size=(8, 4))), Tensor(rng.normal(size=(8, 4)))
    assert not np.allclose(score(a, b, cfg, store).data, score(b, a, cfg, store).data)

    store['pred.W'].data[...] = store['pred.W'].data + store['pred.W'].data.T
    assert np.allclose(score(a, b, cfg, store).data, score(b, a, cfg, store).data)
