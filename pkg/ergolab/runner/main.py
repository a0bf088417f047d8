# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
The ``ergolab`` command.

Exit codes: 0 on success, 1 when an experiment fails at run time and 2 when
the configuration (or the command line) is invalid.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..exceptions import ConfigError
from .config import load_config
from .experiments import list_experiments, run_experiment
from .plotting import plot_records
from .records import FORMATS, write_records, write_summary

__all__ = ['main', 'build_parser', 'output_dir']

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def output_dir(cli_value, cfg):
    """``--out``, then ``ERGOLAB_OUT``, then ``output.dir``, then ``.``."""
    return (cli_value or os.environ.get('ERGOLAB_OUT') or cfg.out_dir
            or os.curdir)


def _executor(threads):
    if threads is None or threads <= 1:
        return None
    return ThreadPoolExecutor(max_workers=threads)


def _run(args):
    cfg = load_config(args.config, args.set, args.seed)
    out = output_dir(args.out, cfg)
    formats = (args.format,) if args.format else cfg.formats
    executor = _executor(args.threads)
    try:
        records, summary = run_experiment(cfg, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    written = []
    for fmt in formats:
        path = os.path.join(out, cfg.name + FORMATS[fmt])
        written.append(write_records(records, path, fmt))
    written.append(write_summary(summary, os.path.join(
        out, cfg.name + '-summary.json')))
    if args.plot or cfg.plot:
        svg = plot_records(records, cfg.experiment.plot_metrics,
                           os.path.join(out, cfg.name + '.svg'),
                           title=cfg.name)
        if svg is not None:
            written.append(svg)
    for path in written:
        print(path)
    return EXIT_OK


def _validate(args):
    cfg = load_config(args.config, args.set, args.seed)
    print('{0}: ok ({1} on {2})'.format(args.config, cfg.kind, cfg.target))
    return EXIT_OK


def _list(args):
    sys.stdout.write(list_experiments(args.format))
    if args.format == 'json':
        sys.stdout.write('\n')
    return EXIT_OK


def _config_arguments(parser):
    parser.add_argument('--config', required=True, metavar='PATH',
                        help='experiment configuration (TOML)')
    parser.add_argument('--seed', type=int, default=None,
                        help='replace experiment.seed')
    parser.add_argument('--set', action='append', default=[],
                        metavar='KEY=VALUE',
                        help='override a configuration key; repeatable')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='ergolab',
        description='Desk-scale experiments on ergodicity, conditional '
                    'ergodicity and filter stability.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress (twice for debug output)')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='only log errors')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run an experiment')
    _config_arguments(run)
    run.add_argument('--out', metavar='DIR', default=None,
                     help='output directory (default: $ERGOLAB_OUT, then '
                          'output.dir, then the current directory)')
    run.add_argument('--threads', type=int, default=1, metavar='N',
                     help='worker threads for replicas')
    run.add_argument('--format', choices=sorted(FORMATS), default=None,
                     help='record format (default: output.formats)')
    run.add_argument('--plot', action='store_true',
                     help='also write an SVG chart')
    run.set_defaults(func=_run)

    validate = sub.add_parser('validate', help='check a configuration')
    _config_arguments(validate)
    validate.set_defaults(func=_validate)

    catalog = sub.add_parser('list', help='list experiment kinds')
    catalog.add_argument('--format', choices=('text', 'json'),
                         default='text')
    catalog.set_defaults(func=_list)
    return parser


def _configure_logging(verbose, quiet):
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except ConfigError as exc:
        for message in exc.messages:
            print(message, file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        log.debug('run failed', exc_info=True)
        print('error: {0}: {1}'.format(type(exc).__name__, exc),
              file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
