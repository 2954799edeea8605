#
# Command-line front end.
#
#   palm_extremes run CONFIG [key=value ...]    run a study, write report.json + summary.csv
#   palm_extremes threshold angles|nn ...       thresholds as JSON
#   palm_extremes analytic FUNCTION ARGS ...    closed-form values as JSON
#   palm_extremes metrics DISTANCE A B          pattern / count-law distances as JSON
#   palm_extremes triangulate POINTS            Delaunay triangles as JSON
#   palm_extremes sample PROCESS ...            seeded samples as JSON
#
# Exit codes: 0 success, 2 invalid input, 3 runtime failure.

import argparse
import json
import logging
import os
import sys

import pandas as pd

from palm_extremes import __version__, analytic, delaunay, exceedances, experiments, metrics, sampling
from palm_extremes.exceptions import (BelowFormulaRegime, NoRootInBracket, PalmExtremesError,
                                      PreconditionViolation, RadicandNegative, StudyFailed)
from palm_extremes.geometry import Window
from study_config import ConfigError, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3
SUMMARY_COLUMNS = ['kind', 'name', 'value']


class UsageError(Exception):
    pass


def emit(value, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(experiments.plain(value), sort_keys=True) + '\n')


def _load_json_arg(text):
    """Inline JSON, or @path to a JSON file."""
    if text.startswith('@'):
        with open(text[1:], 'r') as f:
            return json.load(f)
    try:
        return json.loads(text)
    except ValueError as e:
        raise UsageError("not valid JSON: %r (%s)" % (text, e))


##
# run

def flatten(aggregates, prefix=''):
    rows = []
    for key in sorted(aggregates):
        value = aggregates[key]
        name = prefix + str(key)
        if isinstance(value, dict):
            rows.extend(flatten(value, name + '.'))
        elif isinstance(value, list):
            rows.append((name, json.dumps(value)))
        else:
            rows.append((name, value))
    return rows


def write_report(report, output):
    os.makedirs(output, exist_ok=True)
    with open(os.path.join(output, 'report.json'), 'w') as f:
        json.dump(experiments.plain(report.to_dict()), f, indent=2, sort_keys=True)
        f.write('\n')
    rows = [(report.kind, name, value) for name, value in flatten(report.aggregates)]
    pd.DataFrame(rows, columns=SUMMARY_COLUMNS).to_csv(os.path.join(output, 'summary.csv'),
                                                       index=False)
    logger.info("wrote %s", output)


def cmd_run(args):
    config = load_config(args.config, args.overrides)
    output = args.output or config.output
    try:
        report = experiments.run_study(config)
    except StudyFailed as e:
        if e.partial is not None:
            write_report(e.partial, output)
        raise
    write_report(report, output)
    return EXIT_OK


##
# threshold

def cmd_threshold(args):
    if args.kind == 'angles':
        emit({'v_n': exceedances.angle_threshold(args.n, args.tau)})
        return EXIT_OK
    if args.p1 is None or args.p2 is None:
        raise UsageError("threshold nn needs --p1 and --p2")
    params = (args.p1, args.p2)
    closed = exceedances.nn_threshold_closed_form(args.n, args.tau, params)
    numeric = exceedances.nn_threshold_numeric(args.n, args.tau, params)
    emit({'closed_form': closed, 'numeric': numeric, 'ratio': numeric / closed})
    return EXIT_OK


##
# analytic

def _void_params(rest):
    if len(rest) not in (0, 2):
        raise UsageError("expected p1 p2 after the radius")
    return tuple(rest) if rest else (0.6, 0.2)


ANALYTIC = {
    'a_of_v': (1, lambda v: analytic.a_of_v(v)),
    'gp_void': (None, lambda v, *rest: analytic.gp_void_prob(v, _void_params(rest))),
    'gp_void_limits': (None, lambda *rest: analytic.gp_void_prob_limits(_void_params(rest))),
    'mardia_pdf': (1, analytic.mardia_pdf),
    'mardia_cdf': (1, analytic.mardia_cdf),
    'mardia_quantile': (1, analytic.mardia_quantile),
    'expected_angle_exceedances': (2, analytic.expected_angle_exceedances),
    'nn_expected_exceedances': (None, lambda n, v, *rest: analytic.nn_expected_exceedances(
        n, v, _void_params(rest))),
    'poisson_partial_sum': (2, lambda tau, k: analytic.poisson_partial_sum(tau, int(k))),
    'pn2_integral': (1, analytic.pn2_integral),
    'cp_limit_params': (1, lambda tau: _limit_summary(analytic.cp_limit_params(tau))),
}


def _limit_summary(limit):
    return {'tau': limit.tau, 'pi1_mass': limit.pi1_mass, 'pi2_mass': limit.pi2_mass,
            'gamma': limit.gamma, 'theta': limit.theta, 'Q': limit.Q.as_dict()}


def cmd_analytic(args):
    arity, func = ANALYTIC[args.function]
    if arity is not None and len(args.values) != arity:
        raise UsageError("%s takes %d argument(s), got %d" % (args.function, arity, len(args.values)))
    try:
        value = func(*args.values)
    except TypeError as e:
        raise UsageError("%s: %s" % (args.function, e))
    emit({'function': args.function, 'args': args.values, 'value': value})
    return EXIT_OK


##
# metrics

def cmd_metrics(args):
    a, b = _load_json_arg(args.a), _load_json_arg(args.b)
    if args.distance == 'd1':
        result = metrics.d1(a, b)
        emit({'value': result.value, 'assignment': result.assignment})
    elif args.distance == 'd1_bruteforce':
        emit({'value': metrics.d1_bruteforce(a, b)})
    elif args.distance == 'd_hat1':
        emit({'value': metrics.d_hat1(a, b)})
    elif args.distance == 'd2':
        emit({'value': metrics.empirical_d2(a, b)})
    else:
        p = metrics.Pmf.from_dict(a) if isinstance(a, dict) else metrics.Pmf(a)
        q = metrics.Pmf.from_dict(b) if isinstance(b, dict) else metrics.Pmf(b)
        emit({'value': metrics.tv(p, q)})
    return EXIT_OK


##
# triangulate

def cmd_triangulate(args):
    points = sampling.CountingMeasure(_load_json_arg(args.points))
    tri = delaunay.triangulate(points, method=args.method)
    emit({
        'simplices': tri.simplices,
        'neighbors': tri.neighbors,
        'circumcenters': tri.circumcenters,
        'circumradii': tri.circumradii,
        'min_angles': tri.min_angles,
        'hull_size': tri.hull_size,
        'empty_circumdisk': delaunay.verify_empty_circumdisk(tri, points),
    })
    return EXIT_OK


##
# sample

def _gp(args):
    return sampling.GaussPoissonParams.from_p1_p2(args.p1, args.p2)


def cmd_sample(args):
    seed = sampling.Seed(args.seed, args.replication)
    window = Window.from_scale(args.n)
    if args.process == 'poisson':
        out = sampling.sample_poisson(args.intensity, window, seed).points
    elif args.process == 'gauss-poisson':
        out = sampling.sample_gauss_poisson(_gp(args), window, seed).points
    elif args.process == 'palm-gauss-poisson':
        out = sampling.sample_palm_gauss_poisson(_gp(args), window, seed).points
    elif args.process == 'cp-limit':
        cp = sampling.sample_cp_limit(args.tau, seed)
        out = {'centers': cp.centers, 'marks': cp.marks}
    else:
        t = sampling.sample_typical_triangle(seed)
        out = {'R': t.R, 'U': [tuple(t.U1), tuple(t.U2), tuple(t.U3)], 'min_angle': t.min_angle}
    emit(out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog='palm_extremes',
                                     description='Exceedance and compound Poisson simulations')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    parser.add_argument('-q', '--quiet', action='store_true', help='warnings only')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    run = sub.add_parser('run', help='run a study from a config file')
    run.add_argument('config', help='JSON (or yaml) config file')
    run.add_argument('overrides', nargs='*', help='key=value overrides, dotted for sections')
    run.add_argument('-o', '--output', default=None, help='output directory')
    run.set_defaults(func=cmd_run)

    th = sub.add_parser('threshold', help='exceedance thresholds')
    th.add_argument('kind', choices=['angles', 'nn'])
    th.add_argument('--n', type=float, required=True)
    th.add_argument('--tau', type=float, required=True)
    th.add_argument('--p1', type=float, default=None)
    th.add_argument('--p2', type=float, default=None)
    th.set_defaults(func=cmd_threshold)

    an = sub.add_parser('analytic', help='closed-form quantities')
    an.add_argument('function', choices=sorted(ANALYTIC))
    an.add_argument('values', nargs='*', type=float)
    an.set_defaults(func=cmd_analytic)

    me = sub.add_parser('metrics', help='distances between patterns or count laws')
    me.add_argument('distance', choices=['d1', 'd1_bruteforce', 'd_hat1', 'd2', 'tv'])
    me.add_argument('a', help='JSON value or @file')
    me.add_argument('b', help='JSON value or @file')
    me.set_defaults(func=cmd_metrics)

    tr = sub.add_parser('triangulate', help='Delaunay triangulation of a point list')
    tr.add_argument('points', help='JSON list of [x, y] or @file')
    tr.add_argument('--method', choices=list(delaunay.BACKENDS), default='bowyer-watson')
    tr.set_defaults(func=cmd_triangulate)

    sa = sub.add_parser('sample', help='seeded sample of a process')
    sa.add_argument('process', choices=['poisson', 'gauss-poisson', 'palm-gauss-poisson',
                                        'cp-limit', 'typical-triangle'])
    sa.add_argument('--n', type=float, default=100.0, help='window area')
    sa.add_argument('--seed', type=int, default=0)
    sa.add_argument('--replication', type=int, default=0)
    sa.add_argument('--intensity', type=float, default=1.0)
    sa.add_argument('--tau', type=float, default=1.0)
    sa.add_argument('--p1', type=float, default=0.6)
    sa.add_argument('--p2', type=float, default=0.2)
    sa.set_defaults(func=cmd_sample)
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INVALID
    configure_logging(args)
    try:
        return args.func(args)
    except (ConfigError, PreconditionViolation, UsageError) as e:
        sys.stderr.write("palm_extremes: invalid input: %s\n" % (e,))
        return EXIT_INVALID
    except (RadicandNegative, BelowFormulaRegime, NoRootInBracket) as e:
        if args.command == 'threshold':
            sys.stderr.write("palm_extremes: threshold outside its regime: %s: %s\n"
                             % (type(e).__name__, e))
            return EXIT_INVALID
        sys.stderr.write("palm_extremes: %s: %s\n" % (type(e).__name__, e))
        return EXIT_RUNTIME
    except PalmExtremesError as e:
        sys.stderr.write("palm_extremes: %s: %s\n" % (type(e).__name__, e))
        return EXIT_RUNTIME
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        sys.stderr.write("palm_extremes: unexpected %s: %s\n" % (type(e).__name__, e))
        return EXIT_RUNTIME


if __name__ == '__main__':
    sys.exit(main())
