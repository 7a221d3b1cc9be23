#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os
import sys
import csv
import json
import argparse
import logging

import numpy as np

from utils.other_utils import logger, atomic_open

base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sep = '/' if '/' in sys.argv[0] else os.sep

VERBS = ('train', 'evaluate', 'ablate', 'heuristic', 'generate')
CSV_COLUMNS = ('run', 'seed', 'metric', 'value')


def set_log_format(logs_dir=None):
    import logging.handlers

    # set logger format
    logfile_format = logging.Formatter(
        "[%(asctime)s] [%(module)s:%(funcName)s] [%(lineno)d] [%(levelname)s] %(message)s"
    )

    # add rotate file handler
    if logs_dir is None:
        logs_dir = os.path.join(base_dir, 'logs')
    if not os.path.isdir(logs_dir):
        os.makedirs(logs_dir, exist_ok=True)

    logfile = logs_dir + sep + sys.argv[0].split(sep)[-1].split('.')[0] + '.log'
    file_maxsize = 1024 * 1024 * 100  # 100m

    file_handler = logging.handlers.RotatingFileHandler(logfile, maxBytes=file_maxsize, backupCount=10)
    file_handler.setFormatter(logfile_format)
    logger.addHandler(file_handler)
    return logfile


def parse_args():
    """parse args for pairlink"""

    parser = argparse.ArgumentParser(description='Pairwise-learning neural link prediction', add_help=False,
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--help', dest='help', action='store_true', help='help information', default=False)
    extend_parser(parser)
    return parser


def extend_parser(parser):
    command = parser.add_argument_group('command')
    command.add_argument('verb', nargs='?', choices=VERBS, help='What to do')
    command.add_argument('config', nargs='?', type=str,
                         help='Config file or preset name (not used by generate)')
    command.add_argument('checkpoint', nargs='?', type=str, help='Checkpoint file for evaluate')

    run = parser.add_argument_group('run setting')
    run.add_argument('--seed', dest='seed', type=int, help='Base seed, overrides the config key seed')
    run.add_argument('--runs', dest='runs', type=int, help='Number of seeds, overrides the config key runs')
    run.add_argument('--out', dest='out', type=str,
                     help='Dir for reports and checkpoints; for generate, the edge list file to write')
    run.add_argument('--set', dest='overrides', type=str, nargs='*', default=[],
                     help='Config overrides. Format: key=value [key=value ...]')
    run.add_argument('--force', dest='force', action='store_true', default=False,
                     help='Load a checkpoint even if it was saved under another architecture config')
    run.add_argument('--quiet', dest='quiet', action='store_true', default=False,
                     help='Disable progress bars')

    generate = parser.add_argument_group('generate setting')
    generate.add_argument('--generator', dest='generator', type=str, choices=('sbm', 'ba'), default='sbm',
                          help='Synthetic graph model')
    generate.add_argument('--nodes', dest='nodes', type=int, default=400, help='Number of nodes')
    generate.add_argument('--blocks', dest='blocks', type=int, default=2, help='SBM: number of blocks')
    generate.add_argument('--p-in', dest='p_in', type=float, default=0.10, help='SBM: in-block edge probability')
    generate.add_argument('--p-out', dest='p_out', type=float, default=0.01,
                          help='SBM: between-block edge probability')
    generate.add_argument('--ba-m', dest='ba_m', type=int, default=3, help='BA: edges attached per new node')
    return


def command_line_args(args):
    need_print_help = False if args else True
    parser = parse_args()
    args = parser.parse_args(args)

    if args.help or need_print_help or not args.verb:
        parser.print_help()
        sys.exit(1)

    if args.verb != 'generate' and not args.config:
        parser.error(f'{args.verb} needs a config file or preset name')
    if args.verb == 'evaluate' and not args.checkpoint:
        parser.error('evaluate needs a checkpoint file')
    if args.verb == 'generate' and not args.out:
        parser.error('generate needs --out <edge list file>')
    if args.runs is not None and args.runs < 1:
        parser.error('--runs must be >= 1')

    if args.out and args.verb != 'generate' and not os.path.exists(args.out):
        os.makedirs(args.out, exist_ok=True)
    return args


def config_overrides(args):
    """`--set` items followed by the dedicated flags, which win."""
    items = list(args.overrides or [])
    if args.seed is not None:
        items.append(f'seed={args.seed}')
    if args.runs is not None:
        items.append(f'runs={args.runs}')
    if args.quiet:
        items.append('quiet=true')
    return items


def to_jsonable(value):
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def save_json_report(path, report):
    with atomic_open(path, 'w') as f:
        json.dump(to_jsonable(report), f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f'Saved report into [{path}]')


def report_rows(run, seed, report, prefix=''):
    return [(run, seed, prefix + name, value) for name, value in sorted(report.metrics.items())]


def save_result_csv(path, rows):
    with atomic_open(path, 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for run, seed, metric, value in rows:
            writer.writerow((run, seed, metric, repr(float(value))))
    logger.info(f'Saved {len(rows)} metric rows into [{path}]')


def result_file(out_dir, name, suffix):
    return os.path.join(out_dir, name + suffix)


def mean_std(values):
    """Population std, so a single run reports 0."""
    values = np.asarray(values, dtype=np.float64)
    return float(values.mean()), float(values.std())
