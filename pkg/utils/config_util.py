# -*- coding: utf-8 -*-
"""
Experiment configuration.

A config file is one flat JSON object whose keys are the field names of
`ExperimentConfig`. Unknown keys and values of the wrong type are rejected with
a ConfigError naming the key.
"""
import dataclasses
import hashlib
import json
import os
import typing
from dataclasses import dataclass
from typing import Optional

from utils.encoder_util import EncoderConfig
from utils.error_util import ConfigError
from utils.objective_util import LOSS_KINDS, LossConfig
from utils.predictor_util import PredictorConfig
from utils.sampler_util import SamplerConfig

base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PRESET_DIR = os.path.join(base_dir, 'presets')

# keys that change parameter shapes or meaning; they make up the checkpoint config hash
ARCH_KEYS = ('directed', 'encoder', 'encoder_layers', 'hidden_dim', 'node_input', 'embedding_dim',
             'predictor', 'mlp_layers', 'mlp_hidden')


@dataclass
class ExperimentConfig:
    # graph source
    graph_path: Optional[str] = None
    feature_path: Optional[str] = None
    directed: bool = False
    generator: Optional[str] = None
    gen_nodes: int = 400
    gen_blocks: int = 2
    gen_p_in: float = 0.10
    gen_p_out: float = 0.01
    gen_ba_m: int = 3
    gen_seed: int = 0
    use_edge_weights: bool = False
    # encoder
    encoder: str = 'sage'
    encoder_layers: int = 2
    hidden_dim: int = 64
    encoder_dropout: float = 0.0
    node_input: str = 'embedding'
    embedding_dim: int = 64
    # predictor
    predictor: str = 'dot'
    mlp_layers: int = 2
    mlp_hidden: int = 64
    predictor_dropout: float = 0.0
    # objective
    loss: str = 'auc'
    ablation_loss: str = 'cross_entropy'
    l2_lambda: float = 0.0
    # sampling and augmentation
    sampler: str = 'global'
    num_neg: int = 1
    degree_power: float = 0.0
    filter_eval_edges: bool = False
    walk_aug: bool = False
    walk_length: int = 10
    walks_per_node: int = 1
    walk_refresh: int = 1
    # optimization
    optimizer: str = 'adam'
    lr: float = 0.001
    epochs: int = 100
    batch_size: int = 65536
    # evaluation
    eval_metric: str = 'auc'
    hits_k: int = 20
    eval_num_neg: int = 500
    eval_mrr_neg: int = 0
    eval_every: int = 1
    # split
    split: str = 'random'
    train_frac: float = 0.8
    valid_frac: float = 0.1
    test_frac: float = 0.1
    valid_path: Optional[str] = None
    test_path: Optional[str] = None
    train_on_valid: bool = False
    # run
    seed: int = 0
    runs: int = 1
    quiet: bool = False

    def encoder_config(self):
        return EncoderConfig(kind=self.encoder, num_layers=self.encoder_layers, hidden_dim=self.hidden_dim,
                             dropout=self.encoder_dropout, node_input=self.node_input,
                             embedding_dim=self.embedding_dim)

    def predictor_config(self):
        return PredictorConfig(kind=self.predictor, mlp_layers=self.mlp_layers, mlp_hidden=self.mlp_hidden,
                               dropout=self.predictor_dropout)

    def loss_config(self, kind=None):
        return LossConfig(kind=kind or self.loss, lam=self.l2_lambda)

    def sampler_config(self, seed=None):
        return SamplerConfig(strategy=self.sampler, num_neg=self.num_neg, degree_power=self.degree_power,
                             seed=self.seed if seed is None else seed)

    def to_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return validate_config(dataclasses.replace(self, **changes))


def _field_types():
    hints = typing.get_type_hints(ExperimentConfig)
    return {f.name: hints[f.name] for f in dataclasses.fields(ExperimentConfig)}


def _base_type(tp):
    args = [a for a in typing.get_args(tp) if a is not type(None)]
    return (args[0], True) if args else (tp, False)


def check_value(key, value):
    types = _field_types()
    if key not in types:
        raise ConfigError(key, 'unknown key')
    tp, optional = _base_type(types[key])
    if value is None:
        if optional:
            return None
        raise ConfigError(key, f'must be {tp.__name__}, got null')
    if tp is bool:
        ok = isinstance(value, bool)
    elif tp is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif tp is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, tp)
    if not ok:
        raise ConfigError(key, f'must be {tp.__name__}, got {type(value).__name__} {value!r}')
    return value


def coerce_override(item):
    """Turn a `key=value` command-line override into a typed (key, value) pair."""
    if '=' not in item:
        raise ConfigError(item, 'override must look like key=value')
    key, raw = item.split('=', 1)
    key, raw = key.strip(), raw.strip()
    types = _field_types()
    if key not in types:
        raise ConfigError(key, 'unknown key')
    tp, optional = _base_type(types[key])
    if optional and raw.lower() in ('null', 'none', ''):
        return key, None
    try:
        if tp is bool:
            if raw.lower() not in ('true', 'false', '1', '0', 'yes', 'no'):
                raise ValueError(raw)
            return key, raw.lower() in ('true', '1', 'yes')
        return key, tp(raw)
    except ValueError:
        raise ConfigError(key, f'cannot read {raw!r} as {tp.__name__}')


def _choice(key, value, choices):
    if value not in choices:
        raise ConfigError(key, f'must be one of {choices}, got [{value}]')


def validate_config(cfg, check_files=True):
    for f in dataclasses.fields(cfg):
        check_value(f.name, getattr(cfg, f.name))

    cfg.encoder_config().validate(has_features=cfg.feature_path is not None)
    cfg.predictor_config().validate()
    cfg.sampler_config().validate()
    _choice('loss', cfg.loss, LOSS_KINDS)
    _choice('ablation_loss', cfg.ablation_loss, LOSS_KINDS)
    _choice('optimizer', cfg.optimizer, ('sgd', 'adam'))
    _choice('eval_metric', cfg.eval_metric, ('auc', 'hits', 'mrr'))
    _choice('split', cfg.split, ('random', 'provided'))
    _choice('generator', cfg.generator, (None, 'sbm', 'ba'))
    cfg.loss_config().validate(has_gammas=cfg.walk_aug or cfg.use_edge_weights)

    positive = ('epochs', 'batch_size', 'walk_length', 'walks_per_node', 'walk_refresh', 'hits_k',
                'eval_every', 'runs', 'gen_nodes', 'gen_blocks', 'gen_ba_m')
    for key in positive:
        if getattr(cfg, key) < 1:
            raise ConfigError(key, f'must be >= 1, got {getattr(cfg, key)}')
    for key in ('eval_num_neg', 'eval_mrr_neg'):
        if getattr(cfg, key) < 0:
            raise ConfigError(key, f'must be >= 0, got {getattr(cfg, key)}')
    if cfg.lr < 0:
        raise ConfigError('lr', f'must be >= 0, got {cfg.lr}')
    for key in ('gen_p_in', 'gen_p_out'):
        if not 0.0 <= getattr(cfg, key) <= 1.0:
            raise ConfigError(key, f'must be a probability, got {getattr(cfg, key)}')
    if cfg.eval_metric == 'mrr' and cfg.eval_mrr_neg < 1:
        raise ConfigError('eval_mrr_neg', 'eval_metric=mrr needs eval_mrr_neg >= 1')
    if cfg.eval_metric == 'hits' and cfg.eval_num_neg < cfg.hits_k:
        raise ConfigError('eval_num_neg', f'eval_metric=hits needs at least hits_k={cfg.hits_k} negatives')
    if cfg.eval_num_neg == 0 and cfg.eval_mrr_neg == 0:
        raise ConfigError('eval_num_neg', 'no evaluation candidates configured')
    if cfg.graph_path is not None and cfg.generator is not None:
        raise ConfigError('generator', 'set either graph_path or generator, not both')

    if cfg.split == 'random':
        fractions = (cfg.train_frac, cfg.valid_frac, cfg.test_frac)
        if any(f <= 0 for f in fractions):
            raise ConfigError('train_frac', f'split fractions must be positive, got {fractions}')
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError('train_frac', f'split fractions must sum to 1, got {sum(fractions)}')
    elif cfg.valid_path is None or cfg.test_path is None:
        raise ConfigError('valid_path', 'split=provided needs valid_path and test_path')

    if check_files:
        for key in ('graph_path', 'feature_path', 'valid_path', 'test_path'):
            path = getattr(cfg, key)
            if path is not None and not os.path.isfile(path):
                raise ConfigError(key, f'file [{path}] does not exist')
    return cfg


def preset_names():
    if not os.path.isdir(PRESET_DIR):
        return []
    return sorted(f[:-5] for f in os.listdir(PRESET_DIR) if f.endswith('.json'))


def resolve_source(source):
    if os.path.isfile(source):
        return source
    preset = os.path.join(PRESET_DIR, source + '.json')
    if os.path.isfile(preset):
        return preset
    raise ConfigError('config', f'[{source}] is neither a config file nor a preset {preset_names()}')


def parse_config(source=None, overrides=None, check_files=True):
    """
    Load a config file or preset, apply `overrides` (a dict, or `key=value` strings), validate.
    """
    data = {}
    if source is not None:
        path = resolve_source(source)
        with open(path, 'r', encoding='utf8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError('config', f'[{path}] is not valid JSON: {e}')
        if not isinstance(data, dict):
            raise ConfigError('config', f'[{path}] must hold a JSON object')
        for key, value in data.items():
            if isinstance(value, (dict, list)):
                raise ConfigError(key, 'values must be scalars')
            data[key] = check_value(key, value)

    if overrides:
        items = overrides.items() if isinstance(overrides, dict) else map(coerce_override, overrides)
        for key, value in items:
            data[key] = check_value(key, value)

    return validate_config(ExperimentConfig(**data), check_files=check_files)


def config_hash(cfg):
    """Short hash of the architecture keys; checkpoints are only loadable under a matching hash."""
    arch = {k: getattr(cfg, k) for k in ARCH_KEYS}
    return hashlib.sha256(json.dumps(arch, sort_keys=True).encode('utf8')).hexdigest()[:16]
