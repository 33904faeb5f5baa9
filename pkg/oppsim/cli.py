"""The ``oppsim`` command: resolve an experiment from a preset, a config
file and flags, run every sweep point under every seed, average the runs and
write the series."""

__all__ = ['PresetError', 'ExperimentSpec', 'BatchResult', 'load_config',
           'preset', 'run_batch', 'build_parser', 'main']

import argparse
import io
import logging
import os
import sys
from collections import OrderedDict, namedtuple
from concurrent.futures import ProcessPoolExecutor

from oppsim import version
from oppsim.config import KEYS, ConfigError, SimConfig, flag_name, parse_config
from oppsim.engine import RunError, Simulation
from oppsim.metrics import average_runs
from oppsim.presets import PRESETS, preset_tags
from oppsim.serializers import (serialize_csv, serialize_gnuplot,
                                serialize_summary, series_filename,
                                utc_timestamp)

log = logging.getLogger(__name__)


class PresetError(ConfigError):
    """Raised for an unknown preset tag."""
    pass


class ExperimentSpec(namedtuple('ExperimentSpec',
                                'tag points seeds out jobs gnuplot')):
    """ExperimentSpec(tag, points, seeds, out, jobs, gnuplot)

    `points` is a list of (label, SimConfig) pairs; every point runs once per
    seed."""

    __slots__ = ()

    def runs(self):
        """(point index, label, config) of every run, in sweep then seed
        order."""
        for index, (label, config) in enumerate(self.points):
            for seed in self.seeds:
                yield index, label, config.replace({'sim.seed': seed})


BatchResult = namedtuple('BatchResult', 'label config runs average summary')


def _label(tag, variant):
    return '%s-%s' % (tag, variant) if variant else tag


def load_config(path=None, flags=None, preset_tag=None, seed=1, runs=10,
                out='results', jobs=1, gnuplot=False):
    """Resolve an experiment. Values are layered as defaults, then the
    preset (shared overrides, then the sweep point's own), then the config
    file, then `flags`."""
    if preset_tag is not None:
        chosen = _preset_entry(preset_tag)
        tag = preset_tag
        shared, points = chosen.overrides, chosen.points
    else:
        tag = os.path.splitext(os.path.basename(path))[0] if path else 'run'
        shared, points = {}, [None]
    file_values = OrderedDict()
    if path is not None:
        try:
            with io.open(path, encoding='utf-8') as f:
                file_values = parse_config(f.read())
        except IOError as e:
            raise ConfigError('Cannot read %s: %s' % (path, e))
    if runs < 1:
        raise ConfigError('At least one run is needed, got %d' % runs)
    resolved = []
    for point in points:
        values = OrderedDict(shared)
        if point is not None:
            values.update(point.overrides)
        values.update(file_values)
        values.update(flags or {})
        label = _label(tag, point.variant if point is not None else None)
        resolved.append((label, SimConfig.from_mapping(values)))
    seeds = [seed + i for i in range(runs)]
    return ExperimentSpec(tag, resolved, seeds, out, jobs, gnuplot)


def _preset_entry(tag):
    try:
        return PRESETS[tag]
    except KeyError:
        raise PresetError('Unknown preset %r; available: %s' %
                          (tag, ', '.join(preset_tags())), key='preset')


def preset(tag, **kwargs):
    """The experiment of a figure, eg. ``preset('fig2')``."""
    return load_config(preset_tag=tag, **kwargs)


def _run_one(label, config):
    simulation = Simulation(config, label)
    series = simulation.run()
    return series, simulation.summary()


def _write(series, directory, gnuplot):
    path = os.path.join(directory, series_filename(series.metadata))
    with io.open(path, 'w', newline='') as f:
        serialize_csv(series, f)
    if gnuplot:
        with io.open(os.path.splitext(path)[0] + '.dat', 'w') as f:
            serialize_gnuplot(series, f)
    log.debug('Wrote %s', path)
    return path


def _execute(spec):
    tasks = list(spec.runs())
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_run_one, label, config)
                       for _, label, config in tasks]
            for (index, label, config), future in zip(tasks, futures):
                try:
                    yield index, future.result()
                except Exception as e:
                    raise RunError(label, config['sim.seed'], e)
    else:
        for index, label, config in tasks:
            try:
                yield index, _run_one(label, config)
            except Exception as e:
                raise RunError(label, config['sim.seed'], e)


def run_batch(spec):
    """Run every point of `spec` under every seed and write one CSV per run,
    one averaged CSV per point (plus windowed copies from the dynamic event
    on) and a JSON summary. Returns a :py:class:`BatchResult` per point."""
    if not os.path.isdir(spec.out):
        os.makedirs(spec.out)
    by_point = [[] for _ in spec.points]
    for index, outcome in _execute(spec):
        by_point[index].append(outcome)

    results = []
    for (label, config), outcomes in zip(spec.points, by_point):
        runs = [series for series, _ in outcomes]
        files = [_write(series, spec.out, spec.gnuplot) for series in runs]
        average = average_runs(runs)
        files.append(_write(average, spec.out, spec.gnuplot))
        event_at = average.metadata.get('event_at')
        if event_at is not None:
            files.append(_write(average.window(event_at), spec.out,
                                spec.gnuplot))
        final = average.final
        summary = OrderedDict([
            ('label', label),
            ('scenario', config['scenario']),
            ('policy', config['policy.name']),
            ('rt', config['policy.theta_i']),
            ('runs', len(runs)),
            ('final_hit_rate', final.hit_rate),
            ('final_overhead', final.overhead_total),
            ('files', [os.path.basename(f) for f in files]),
            ('config', config.replace({'sim.seed': spec.seeds[0]})
             .as_mapping()),
        ])
        for key in ('equivalent_uniform_p', 'equivalent_uniform_p_met'):
            equivalent = [s[key] for _, s in outcomes
                          if s.get(key) is not None]
            if equivalent:
                summary[key] = sum(equivalent) / len(equivalent)
        log.info('%s %s RT=%d: final HR %.4f, overhead %.1f', label,
                 config['policy.name'].upper(), config['policy.theta_i'],
                 final.hit_rate, final.overhead_total)
        results.append(BatchResult(label, config, runs, average, summary))

    path = os.path.join(spec.out, '%s_summary.json' % spec.tag)
    with io.open(path, 'w') as f:
        serialize_summary(OrderedDict([
            ('tag', spec.tag),
            ('generated', utc_timestamp()),
            ('version', version),
            ('seeds', spec.seeds),
            ('points', [r.summary for r in results]),
        ]), f)
    log.info('Summary written to %s', path)
    return results


ALIASES = [('--policy', 'policy.name'), ('--rt', 'policy.theta_i'),
           ('--oc-size', 'oc.size'), ('--scenario', 'scenario')]


def build_parser():
    parser = argparse.ArgumentParser(
        prog='oppsim',
        description='Simulate data dissemination in opportunistic networks.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + version)
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='log debug messages')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='log warnings and errors only')
    commands = parser.add_subparsers(dest='command')

    run = commands.add_parser('run', help='run an experiment')
    run.add_argument('--config', metavar='FILE', help='key = value file')
    run.add_argument('--preset', metavar='TAG', help='figure preset')
    run.add_argument('--seed', type=int, default=1,
                     help='first seed (default: %(default)s)')
    run.add_argument('--runs', type=int, default=10,
                     help='seeds per sweep point (default: %(default)s)')
    run.add_argument('--out', default='results', metavar='DIR',
                     help='output directory (default: %(default)s)')
    run.add_argument('--jobs', type=int, default=1,
                     help='runs executed in parallel (default: %(default)s)')
    run.add_argument('--gnuplot', action='store_true',
                     help='also write gnuplot .dat files')
    for flag, key in ALIASES:
        run.add_argument(flag, dest=key, default=argparse.SUPPRESS,
                         help=KEYS[key].help)
    keys = run.add_argument_group('configuration keys')
    taken = set(flag for flag, _ in ALIASES)
    for name, key in KEYS.items():
        if flag_name(name) in taken:
            continue
        keys.add_argument(flag_name(name), dest=name, metavar='VALUE',
                          default=argparse.SUPPRESS,
                          help='%s (default: %s)' % (key.help, key.default))

    commands.add_parser('presets', help='list the figure presets')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')

    if args.command == 'presets':
        for tag in preset_tags():
            print('%-6s %s' % (tag, PRESETS[tag].description))
        return 0
    if args.command != 'run':
        parser.print_help()
        return 2

    flags = OrderedDict((name, value) for name, value in vars(args).items()
                        if name in KEYS)
    try:
        spec = load_config(args.config, flags, args.preset, seed=args.seed,
                           runs=args.runs, out=args.out, jobs=args.jobs,
                           gnuplot=args.gnuplot)
        results = run_batch(spec)
    except ConfigError as e:
        sys.stderr.write('oppsim: %s\n' % e)
        return 2
    except RunError as e:
        sys.stderr.write('oppsim: %s\n' % e)
        return 1

    print('%-24s %-6s %5s %10s %14s' % ('point', 'policy', 'RT', 'final HR',
                                        'final overhead'))
    for result in results:
        summary = result.summary
        print('%-24s %-6s %5d %10.4f %14.1f' % (
            summary['label'], summary['policy'].upper(), summary['rt'],
            summary['final_hit_rate'], summary['final_overhead']))
    return 0


if __name__ == '__main__':
    sys.exit(main())
