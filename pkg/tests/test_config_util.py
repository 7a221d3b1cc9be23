# -*- coding: utf-8 -*-
import json

import pytest

from utils.config_util import ExperimentConfig, coerce_override, config_hash, parse_config, preset_names
from utils.error_util import ConfigError


def write_config(tmp_path, data):
    path = tmp_path / 'cfg.json'
    path.write_text(json.dumps(data))
    return str(path)


def test_presets_shipped():
    assert {'ddi-style', 'collab-style', 'ppa-style', 'citation2-style', 'sbm-benchmark'} <= set(preset_names())


def test_ddi_preset():
    cfg = parse_config('ddi-style')
    assert (cfg.encoder, cfg.encoder_layers, cfg.hidden_dim) == ('sage', 2, 512)
    assert (cfg.predictor, cfg.mlp_layers, cfg.mlp_hidden) == ('mlp_hadamard', 2, 512)
    assert (cfg.sampler, cfg.num_neg, cfg.loss) == ('global', 3, 'auc')


def test_collab_preset_uses_walks():
    cfg = parse_config('collab-style')
    assert cfg.loss == 'weighted_hinge_auc'
    assert cfg.walk_aug and cfg.walk_length == 10


@pytest.mark.parametrize('preset', ['ppa-style', 'citation2-style'])
def test_feature_presets_need_features(tmp_path, preset):
    with pytest.raises(ConfigError) as e:
        parse_config(preset)
    assert e.value.key == 'feature_path'
    feats = tmp_path / 'feats.txt'
    feats.write_text('a 1.0\n')
    assert parse_config(preset, [f'feature_path={feats}']).node_input == 'concat'


def test_unknown_key(tmp_path):
    with pytest.raises(ConfigError) as e:
        parse_config(write_config(tmp_path, {'epoch': 3}))
    assert e.value.key == 'epoch'


def test_type_mismatch(tmp_path):
    with pytest.raises(ConfigError) as e:
        parse_config(write_config(tmp_path, {'epochs': 'abc'}))
    assert e.value.key == 'epochs'
    with pytest.raises(ConfigError):
        parse_config(write_config(tmp_path, {'epochs': True}))
    assert parse_config(write_config(tmp_path, {'lr': 1})).lr == 1.0


def test_weighted_hinge_needs_margins(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write_config(tmp_path, {'loss': 'weighted_hinge_auc'}))
    assert parse_config(write_config(tmp_path, {'loss': 'weighted_hinge_auc', 'walk_aug': True})).walk_aug


def test_fractions_and_epochs(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write_config(tmp_path, {'train_frac': 0.7}))
    with pytest.raises(ConfigError):
        parse_config(write_config(tmp_path, {'epochs': 0}))


def test_missing_files(tmp_path):
    with pytest.raises(ConfigError) as e:
        parse_config(write_config(tmp_path, {'graph_path': str(tmp_path / 'nope.txt')}))
    assert e.value.key == 'graph_path'


def test_overrides_win(tmp_path):
    cfg = parse_config(write_config(tmp_path, {'epochs': 5}), ['epochs=7', 'directed=true', 'lr=0.5'])
    assert (cfg.epochs, cfg.directed, cfg.lr) == (7, True, 0.5)
    assert coerce_override('graph_path=null') == ('graph_path', None)
    with pytest.raises(ConfigError):
        coerce_override('epochs')
    with pytest.raises(ConfigError):
        coerce_override('epochs=x')


def test_config_hash_tracks_architecture():
    base = ExperimentConfig()
    assert config_hash(base) == config_hash(base.replace(epochs=3, lr=0.1))
    assert config_hash(base) != config_hash(base.replace(hidden_dim=32))
