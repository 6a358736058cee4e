"""
Command line interface
"""
from __future__ import annotations

import argparse
from dataclasses import replace
import logging
import sys
from typing import List, Sequence

import mtfl.defaults
from mtfl.app import App, COMMANDS
from mtfl.data.config_data import PipelineConfig
from mtfl.data.penalty_data import MODEL_NAMES
from mtfl.errors import ConfigError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

COMMAND_HELP = {
    'ingest': "clean the inputs and write the assembled X and Y",
    'select': "run hybrid feature selection",
    'fit': "fit each model once on every row",
    'experiment': "repeat the train/test protocol per model",
    'vote': "rank features from an experiment.json",
    'report': "write all report artifacts from an experiment.json",
    'simulate': "write one SEIR trajectory",
    'run': "run the whole pipeline including ablations",
}


def _options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        '--config', help="JSON config; flags override its keys"
    )
    parent.add_argument('--factors', help="long-format factor CSV")
    parent.add_argument('--epidemic', help="epidemic series CSV")
    parent.add_argument('--out', help="output directory (default: results)")
    parent.add_argument(
        '--model', choices=list(MODEL_NAMES) + ['all'],
        help="model to run (default: all)"
    )
    parent.add_argument(
        '--runs', type=int,
        help=f"experiment repeats (default: {mtfl.defaults.N_RUNS})"
    )
    parent.add_argument(
        '--seed', type=int, help=f"base seed (default: {mtfl.defaults.SEED})"
    )
    parent.add_argument(
        '--window', type=int,
        help=f"days of CFR per region (default: {mtfl.defaults.WINDOW})"
    )
    parent.add_argument(
        '--group-size', type=int,
        help=f"tasks per group (default: {mtfl.defaults.GROUP_SIZE})"
    )
    parent.add_argument(
        '--augment', type=int, metavar='N',
        help="number of simulated regions to add (default: 0)"
    )
    parent.add_argument(
        '--ablate', action='append', metavar='SECTOR,...',
        help="sectors to drop for one ablation row; repeatable"
    )
    parent.add_argument(
        '--trace', action='store_true', default=None,
        help="write solver traces"
    )
    parent.add_argument(
        '--strict', action='store_true', default=None,
        help="fail on solver non-convergence"
    )
    parent.add_argument(
        '--heatmap-scale', choices=['signed', 'magnitude'],
        help=f"heatmap scale (default: {mtfl.defaults.HEATMAP_SCALE})"
    )
    verbosity = parent.add_mutually_exclusive_group()
    verbosity.add_argument(
        '-v', '--verbose', action='store_true', help="debug logging"
    )
    verbosity.add_argument(
        '-q', '--quiet', action='store_true', help="warnings only"
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with one subcommand per pipeline entry

    :rtype: :py:class:`argparse.ArgumentParser`
    """
    parser = argparse.ArgumentParser(
        prog='mtfl',
        description=(
            "Multi-task feature learning of regional case fatality rates. "
            + f"{mtfl.defaults.THREADS_ENV} caps parallel workers."
        ),
    )
    commands = parser.add_subparsers(dest='command', required=True)
    parent = _options()
    for command in COMMANDS:
        commands.add_parser(
            command, parents=[parent], help=COMMAND_HELP[command]
        )
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else (
        logging.WARNING if quiet else logging.INFO
    )
    logging.basicConfig(
        level=level, format=LOG_FORMAT, stream=sys.stderr, force=True
    )


def _ablations(values: List[str] | None) -> List[List[str]] | None:
    if not values:
        return None
    return [
        [slug.strip() for slug in value.split(',') if slug.strip()]
        for value in values
    ]


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Load the config file, if any, and apply command line overrides

    :param args: Parsed arguments
    :type args: :py:class:`argparse.Namespace`
    :rtype: :py:class:`mtfl.data.config_data.PipelineConfig`
    :raises ConfigError: on an unreadable or invalid config
    """
    config = PipelineConfig.from_json_file(args.config) if args.config \
        else PipelineConfig()
    models = None
    if args.model:
        models = list(MODEL_NAMES) if args.model == 'all' else [args.model]
    ablations = _ablations(args.ablate)
    config = config.override(
        factors=args.factors,
        epidemic=args.epidemic,
        out=args.out,
        models=models,
        n_runs=args.runs,
        seed=args.seed,
        window=args.window,
        group_size=args.group_size,
        ablations=(config.ablations + ablations) if ablations else None,
        trace=args.trace,
        strict=args.strict,
        heatmap_scale=args.heatmap_scale,
    )
    if args.augment is not None:
        if args.augment < 0:
            raise ConfigError("--augment must be non-negative")
        config.augment = replace(config.augment, count=args.augment)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the ``mtfl`` command

    :param argv: Arguments without the program name
    :type argv: sequence of str or None
    :return: Process exit code
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        exc.stage = exc.stage or 'config'
        logger.error("%s", exc)
        return exc.exit_code
    return App(config).execute(args.command)
