#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import sys
from collections import namedtuple

import numpy as np
from rich.progress import track

from utils.checkpoint_util import checkpoint_io
from utils.config_util import config_hash, parse_config
from utils.dataset_util import generate_graph, load_graph, merge_valid_into_train, provided_split, split_edges, \
    write_edge_list
from utils.diffmath_util import ComputeTape, backward, gather, optimizer_step
from utils.error_util import CompatibilityError, DivergenceError, NonFiniteError, PairLinkError
from utils.heuristic_util import HEURISTIC_KINDS, heuristic_scores
from utils.metric_util import build_eval_candidates, evaluate_model, metric_key, score_candidates
from utils.model_util import LinkModel
from utils.objective_util import compute_loss
from utils.other_utils import logger
from utils.pairlink_util import command_line_args, config_overrides, mean_std, report_rows, result_file, \
    save_json_report, save_result_csv, set_log_format
from utils.sampler_util import ExcludedPairs, NegativeSampler, walk_augment

# one independent generator per source of randomness in a run
RUN_STREAMS = ('split', 'init', 'shuffle', 'sampler', 'dropout', 'walk', 'eval')

RunContext = namedtuple('RunContext', ['seed', 'split', 'valid_candidates', 'test_candidates', 'streams'])
RunResult = namedtuple('RunResult', ['run', 'seed', 'model', 'log', 'best_epoch', 'valid_report', 'test_report'])


def run_streams(seed):
    children = np.random.SeedSequence(seed).spawn(len(RUN_STREAMS))
    return dict(zip(RUN_STREAMS, children))


class PairLink(object):

    def __init__(self, cfg, out_dir=None, force=False):
        self.cfg = cfg
        self.out_dir = out_dir
        self.force = force
        self.graph, self.feats = load_graph(cfg)
        self.metric = metric_key(cfg.eval_metric, cfg.hits_k)
        self.config_hash = config_hash(cfg)
        logger.info(f'Loaded {self.graph}, model selection on {self.metric}, config hash {self.config_hash}')

    def prepare_run(self, seed):
        """Split and evaluation candidates for one seed; identical for every call with that seed."""
        cfg = self.cfg
        streams = run_streams(seed)
        if cfg.split == 'random':
            split = split_edges(self.graph, (cfg.train_frac, cfg.valid_frac, cfg.test_frac),
                                np.random.default_rng(streams['split']))
        else:
            split = provided_split(self.graph, cfg.valid_path, cfg.test_path)
        if cfg.train_on_valid:
            split = merge_valid_into_train(split)
            logger.info(f'Training on {len(split.valid)} validation edges as well')

        valid_seed, test_seed = (int(s) for s in streams['eval'].generate_state(2))
        valid_candidates = build_eval_candidates(split.full_graph, split.valid, cfg.eval_num_neg,
                                                 cfg.eval_mrr_neg, valid_seed)
        test_candidates = build_eval_candidates(split.full_graph, split.test, cfg.eval_num_neg,
                                                cfg.eval_mrr_neg, test_seed)
        return RunContext(seed, split, valid_candidates, test_candidates, streams)

    def build_model(self, ctx, store=None):
        cfg = self.cfg
        model = LinkModel(ctx.split.train_graph, cfg.encoder_config(), cfg.predictor_config(), self.feats, store)
        if store is None:
            model.init_params(np.random.default_rng(ctx.streams['init']))
        return model

    def training_positives(self, split):
        """Training positives and their margins; margins come from edge weights when use_edge_weights is set."""
        pairs = split.train
        if self.cfg.use_edge_weights:
            weights = split.train_graph.pair_weights(pairs)
            return pairs, weights / weights.max()
        return pairs, np.ones(len(pairs))

    def train(self, run=0, loss=None):
        """
        Train one run and return its RunResult; the model holds the parameters of
        the epoch with the best validation metric.
        """
        cfg = self.cfg
        seed = cfg.seed + run
        loss_cfg = cfg.loss_config(loss).validate(has_gammas=cfg.walk_aug or cfg.use_edge_weights)
        ctx = self.prepare_run(seed)
        split = ctx.split
        model = self.build_model(ctx)
        store = model.store

        exclude = None
        if cfg.filter_eval_edges:
            exclude = ExcludedPairs(self.graph.num_nodes, np.concatenate([split.valid, split.test]),
                                    symmetric=not self.graph.directed)
        sampler = NegativeSampler(split.train_graph, cfg.sampler_config(seed),
                                  np.random.default_rng(ctx.streams['sampler']), exclude)
        shuffle_rng = np.random.default_rng(ctx.streams['shuffle'])
        dropout_rng = np.random.default_rng(ctx.streams['dropout'])
        walk_rng = np.random.default_rng(ctx.streams['walk'])

        base_pairs, base_gammas = self.training_positives(split)
        pos_all, gammas_all = base_pairs, base_gammas
        pos_per_batch = max(1, cfg.batch_size // cfg.num_neg)
        if cfg.lr == 0:
            logger.warning('lr is 0, parameters will not be updated')
        logger.info(f'Run {run} seed {seed}: {len(split.train)} train / {len(split.valid)} valid / '
                    f'{len(split.test)} test edges, {store.num_values()} parameters, loss {loss_cfg.kind}')

        log = []
        best_value, best_epoch, best_snapshot = None, None, None
        epochs = range(1, cfg.epochs + 1)
        if not cfg.quiet:
            epochs = track(epochs, description=f'run {run} {loss_cfg.kind}')
        for epoch in epochs:
            if cfg.walk_aug and (epoch - 1) % cfg.walk_refresh == 0:
                aug = walk_augment(split.train_graph, cfg.walk_length, walk_rng, cfg.walks_per_node,
                                   base_pairs, base_gammas)
                pos_all, gammas_all = aug.pairs, aug.weights

            order = shuffle_rng.permutation(len(pos_all))
            losses, num_pairs = [], 0
            for batch, start in enumerate(range(0, len(order), pos_per_batch), start=1):
                idx = order[start:start + pos_per_batch]
                pairs = sampler.training_pairs(pos_all[idx], gammas_all[idx])
                try:
                    with ComputeTape() as tape:
                        h = model.embed('train', dropout_rng)
                        pos_scores = model.score_pairs(h, pairs.pos, 'train', dropout_rng)
                        neg_scores = model.score_pairs(h, pairs.neg, 'train', dropout_rng)
                        loss_value = compute_loss(loss_cfg, gather(pos_scores, pairs.pos_index),
                                                  gather(neg_scores, pairs.neg_index), pairs.pair_gammas())
                    backward(loss_value, tape)
                    if cfg.lr > 0:
                        optimizer_step(store, cfg.optimizer, cfg.lr, cfg.l2_lambda)
                    else:
                        store.zero_grad()
                except NonFiniteError as e:
                    raise DivergenceError(epoch, batch, str(e))
                losses.append(loss_value.item())
                num_pairs += len(pairs)

            entry = {'epoch': epoch, 'loss': float(np.mean(losses)), 'pairs': num_pairs}
            if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
                report = evaluate_model(model, ctx.valid_candidates, cfg.hits_k)
                entry.update({f'valid_{k}': v for k, v in report.metrics.items()})
                value = report[self.metric]
                if best_value is None or value > best_value:
                    best_value, best_epoch, best_snapshot = value, epoch, store.snapshot()
            log.append(entry)
            logger.debug(f'Run {run} epoch {epoch}: {entry}')

        store.restore(best_snapshot)
        h = model.embed('eval')
        valid_report = evaluate_model(model, ctx.valid_candidates, cfg.hits_k, h, split='valid', run=run,
                                      seed=seed, epoch=best_epoch)
        test_report = evaluate_model(model, ctx.test_candidates, cfg.hits_k, h, split='test', run=run,
                                     seed=seed, epoch=best_epoch)
        logger.info(f'Run {run} best epoch {best_epoch}: valid {valid_report.metrics}, test {test_report.metrics}')
        return RunResult(run, seed, model, log, best_epoch, valid_report, test_report)

    def save_run(self, result, name):
        if not self.out_dir:
            return
        metadata = {
            'run': result.run,
            'seed': result.seed,
            'best_epoch': result.best_epoch,
            'metric': self.metric,
            'valid_metric': result.valid_report[self.metric],
        }
        checkpoint_io(result.model.store, result_file(self.out_dir, name, '.ckpt'), 'save',
                      node_tokens=self.graph.node_tokens, config_hash=self.config_hash, metadata=metadata)
        save_json_report(result_file(self.out_dir, name, '.json'), {
            'config': self.cfg.to_dict(),
            'valid': result.valid_report.to_dict(),
            'test': result.test_report.to_dict(),
            'log': result.log,
        })

    def run(self):
        """Train every run, save per-run checkpoints/reports and the aggregate CSV."""
        results, rows = [], []
        for run in range(self.cfg.runs):
            result = self.train(run)
            self.save_run(result, f'run{run}')
            results.append(result)
            rows += report_rows(run, result.seed, result.valid_report, 'valid_')
            rows += report_rows(run, result.seed, result.test_report, 'test_')
        if self.out_dir:
            save_result_csv(result_file(self.out_dir, 'results', '.csv'), rows)
        for name in sorted(results[0].test_report.metrics):
            mean, std = mean_std([r.test_report[name] for r in results])
            logger.info(f'Test {name}: {mean:.4f} ± {std:.4f} over {len(results)} runs')
        return results

    def evaluate(self, checkpoint):
        """Re-score a saved checkpoint on the split and candidates of the seed it was trained with."""
        ckpt = checkpoint_io(None, checkpoint, 'load', expected_hash=self.config_hash, force=self.force)
        if ckpt.node_tokens is not None and list(ckpt.node_tokens) != list(self.graph.node_tokens):
            raise CompatibilityError(f'[{checkpoint}] was trained on a graph with another node token map')
        seed = ckpt.metadata.get('seed', self.cfg.seed)
        ctx = self.prepare_run(seed)
        model = self.build_model(ctx, ckpt.store)
        h = model.embed('eval')
        valid_report = evaluate_model(model, ctx.valid_candidates, self.cfg.hits_k, h, split='valid', seed=seed)
        test_report = evaluate_model(model, ctx.test_candidates, self.cfg.hits_k, h, split='test', seed=seed)
        stored = ckpt.metadata.get('valid_metric')
        if stored is not None and valid_report.metrics.get(self.metric) != stored:
            logger.warning(f'Validation {self.metric} {valid_report.metrics.get(self.metric)} differs from the '
                           f'stored {stored}')
        logger.info(f'Checkpoint [{checkpoint}]: valid {valid_report.metrics}, test {test_report.metrics}')
        if self.out_dir:
            name = os.path.splitext(os.path.basename(checkpoint))[0] + '_eval'
            save_json_report(result_file(self.out_dir, name, '.json'),
                             {'valid': valid_report.to_dict(), 'test': test_report.to_dict()})
        return valid_report, test_report

    def ablate(self):
        """
        Train the `loss` arm and the `ablation_loss` arm on the same seeds, so both
        see the same splits, initial parameters and negative draws.
        """
        cfg = self.cfg
        arms = [cfg.loss, cfg.ablation_loss]
        if arms[0] == arms[1]:
            arms = [f'{cfg.loss}#1', f'{cfg.loss}#2']
        per_arm = [[], []]
        rows = []
        for run in range(cfg.runs):
            for i, kind in enumerate((cfg.loss, cfg.ablation_loss)):
                result = self.train(run, loss=kind)
                self.save_run(result, f'ablate_{arms[i]}_run{run}')
                per_arm[i].append(result.test_report.metrics)
                rows += report_rows(run, result.seed, result.test_report, f'{arms[i]}_test_')
        return self.ablation_report(arms, per_arm, rows)

    def ablation_report(self, arms, per_arm, rows):
        """Per-arm mean and std of every test metric, plus how often the first arm wins on auc."""
        summary = {}
        for arm, runs in zip(arms, per_arm):
            summary[arm] = {}
            for name in sorted(runs[0]):
                mean, std = mean_std([m[name] for m in runs])
                summary[arm][name] = {'mean': mean, 'std': std}
        first, second = per_arm
        wins = sum(a['auc'] > b['auc'] for a, b in zip(first, second))
        report = {'arms': arms, 'runs': len(first), 'summary': summary, 'win_rate': wins / len(first)}
        for arm in arms:
            logger.info(f'Arm {arm}: ' + ', '.join(f'{n} {s["mean"]:.4f} ± {s["std"]:.4f}'
                                                   for n, s in summary[arm].items()))
        logger.info(f'Arm {arms[0]} wins {wins} of {len(first)} runs on test auc')
        if self.out_dir:
            save_json_report(result_file(self.out_dir, 'ablation', '.json'), report)
            save_result_csv(result_file(self.out_dir, 'ablation', '.csv'), rows)
        return report

    def heuristic(self):
        """Score the test split with every neighborhood heuristic over the training graph."""
        ctx = self.prepare_run(self.cfg.seed)
        g = ctx.split.train_graph
        reports = {}
        rows = []
        for kind in HEURISTIC_KINDS:
            report = score_candidates(lambda pairs: heuristic_scores(g, pairs, kind), ctx.test_candidates,
                                      self.cfg.hits_k, split='test', heuristic=kind, seed=ctx.seed)
            reports[kind] = report
            rows += report_rows(0, ctx.seed, report, f'{kind}_')
            logger.info(f'Heuristic {kind}: {report.metrics}')
        if self.out_dir:
            save_json_report(result_file(self.out_dir, 'heuristic', '.json'),
                             {kind: r.to_dict() for kind, r in reports.items()})
            save_result_csv(result_file(self.out_dir, 'heuristic', '.csv'), rows)
        return reports


def generate(args):
    graph = generate_graph(args.generator, args.nodes, args.seed or 0, args.blocks, args.p_in, args.p_out, args.ba_m)
    header = f'{args.generator} nodes={args.nodes} seed={args.seed or 0}'
    if args.generator == 'sbm':
        header += f' blocks={args.blocks} p_in={args.p_in} p_out={args.p_out}'
    else:
        header += f' m={args.ba_m}'
    write_edge_list(graph, args.out, header)
    logger.info(f'Saved {graph} into [{args.out}]')
    return graph


def main(args):
    try:
        if args.verb == 'generate':
            generate(args)
            return 0
        cfg = parse_config(args.config, config_overrides(args))
        pairlink = PairLink(cfg, out_dir=args.out, force=args.force)
        if args.verb == 'train':
            pairlink.run()
        elif args.verb == 'evaluate':
            pairlink.evaluate(args.checkpoint)
        elif args.verb == 'ablate':
            pairlink.ablate()
        else:
            pairlink.heuristic()
    except (PairLinkError, FileNotFoundError, IndexError) as e:
        logger.error(f'{type(e).__name__}: {e}')
        sys.exit(1)
    return 0


if __name__ == '__main__':
    command_line_args = command_line_args(sys.argv[1:])
    set_log_format()
    main(command_line_args)
