#
# Seeded Monte Carlo studies.  Each study runs independent replications
# (optionally in worker processes), keeps one JSON-ready record per
# replication, and reduces the records in replication order so serial and
# parallel runs give identical aggregates.  `aggregate` is a pure function
# of (kind, settings, records, reference), which makes a report
# self-contained: recompute_aggregates(report) reproduces its aggregates.

import logging
import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from palm_extremes import analytic, exceedances, metrics, sampling
from palm_extremes.delaunay import interior_mask, triangulate
from palm_extremes.exceptions import (BelowFormulaRegime, NoRootInBracket, PreconditionViolation,
                                      RadicandNegative, StudyFailed)
from palm_extremes.geometry import Window
from palm_extremes.sampling import GaussPoissonParams, Seed

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
WORKERS_ENV = 'PALM_EXTREMES_WORKERS'
KINDS = ('nn-gp', 'delaunay-angles', 'mardia', 'cp-compare', 'thresholds')
MARDIA_BINS = 30
MARDIA_SMALL_ANGLES = (0.1, 0.02)
D2_BATCHES = 5
# stream tags for reference samples drawn outside the replication seeds
REFERENCE_STREAM = 7


@dataclass
class ExperimentReport(object):
    kind: str
    config: dict
    replications: list
    aggregates: dict
    reference: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    software_version: str = ''
    timestamp: dict = field(default_factory=dict)
    status: str = 'complete'

    def to_dict(self):
        return {
            'schema_version': REPORT_SCHEMA_VERSION,
            'kind': self.kind,
            'status': self.status,
            'software_version': self.software_version,
            'config': self.config,
            'seeds': self.seeds,
            'aggregates': self.aggregates,
            'replications': self.replications,
            'reference': self.reference,
            'timestamp': self.timestamp,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(kind=data['kind'], config=data['config'], replications=data['replications'],
                   aggregates=data['aggregates'], reference=data.get('reference', {}),
                   seeds=data.get('seeds', {}),
                   software_version=data.get('software_version', ''),
                   timestamp=data.get('timestamp', {}), status=data.get('status', 'complete'))


##
# Small helpers

def plain(value):
    """Convert numpy values and Pmfs into JSON-ready Python objects."""
    if isinstance(value, dict):
        return dict((str(k), plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, metrics.Pmf):
        return plain(value.as_dict())
    return value


def mean_se(values):
    values = [float(v) for v in values]
    m = len(values)
    if m == 0:
        return None, None
    mean = math.fsum(values) / m
    if m < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in values) / (m - 1)
    return mean, math.sqrt(var / m)


def resolve_workers(requested=None):
    if requested:
        return int(requested)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise PreconditionViolation("%s must be an integer, got %r" % (WORKERS_ENV, env))
        if workers < 1:
            raise PreconditionViolation("%s must be at least 1, got %r" % (WORKERS_ENV, env))
        return workers
    return os.cpu_count() or 1


def _gp_params(settings):
    gp = settings['gauss_poisson']
    return GaussPoissonParams(gp['p0'], gp['p1'], gp['p2'])


def _c_n(settings):
    c_n = settings.get('c_n')
    if c_n is None:
        c_n = math.log(settings['n'])
    if not c_n > 0.0:
        raise PreconditionViolation("cluster radius must be positive, got %r (set c_n when n <= 1)" % (c_n,))
    return c_n


def _reference_seed(settings, stream=REFERENCE_STREAM):
    return Seed(Seed(settings['master_seed']).mixed(stream))


def _patterns(records, key='atoms'):
    return [np.asarray(r[key], dtype=float).reshape(-1, 2) for r in records]


def _version():
    from palm_extremes import __version__
    return __version__


##
# Replications.  Each worker function takes (settings, index) and returns a
# JSON-ready record.

def angle_replication(settings, index):
    n, tau, guard = settings['n'], settings['tau'], settings['guard']
    seed = Seed(settings['master_seed'], index)
    v = exceedances.angle_threshold(n, tau)
    points = sampling.sample_poisson(1.0, Window.from_scale(n).dilate(guard), seed)
    tri = triangulate(points, method=settings['delaunay_backend'])
    proc = exceedances.angle_exceedances(points, n, v, guard=guard, tri=tri)
    clusters = exceedances.cluster_decompose(proc, _c_n(settings))
    return {
        'index': index,
        'count': len(proc),
        'min_angle': exceedances.min_angle_in_window(tri, n),
        'multiplicities': plain(clusters.multiplicities),
        'component_sizes': plain(clusters.component_sizes),
        'atoms': plain(proc.atoms_rescaled),
    }


def nn_replication(settings, index):
    n, tau = settings['n'], settings['tau']
    params = _gp_params(settings)
    seed = Seed(settings['master_seed'], index)
    v = exceedances.nn_threshold_numeric(n, tau, params)
    xi = sampling.sample_gauss_poisson(params, Window.from_scale(n).dilate(v), seed)
    proc = exceedances.nn_exceedances(xi, n, v)
    record = {'index': index, 'count': len(proc), 'order_events': {}, 'kth_nn': {}}
    for k in settings['order_ks']:
        record['order_events'][str(k)] = exceedances.order_statistic_test(proc, k)
        record['kth_nn'][str(k)] = exceedances.kth_largest_nn_distance(xi, n, k)
    record['atoms'] = plain(proc.atoms_rescaled)
    return record


def mardia_replication(settings, index):
    per_chunk = -(-int(settings['samples']) // int(settings['replications']))
    angles = sampling.typical_min_angles(per_chunk, Seed(settings['master_seed'], index))
    edges = mardia_bin_edges()
    counts, _ = np.histogram(angles, bins=edges)
    return {
        'index': index,
        'draws': int(angles.size),
        'bin_counts': plain(counts),
        'below': dict((repr(v), int(np.count_nonzero(angles < v))) for v in MARDIA_SMALL_ANGLES),
    }


def cp_compare_replication(settings, index):
    tau = settings['tau']
    seed = Seed(settings['master_seed'], index)
    first = sampling.sample_cp_limit(tau, Seed(seed.mixed(0)))
    second = sampling.sample_cp_limit(tau, Seed(seed.mixed(1)))
    poisson = sampling.sample_poisson(tau, Window.from_scale(1.0), Seed(seed.mixed(2)))
    return {
        'index': index,
        'cp_first': plain(first.to_counting_measure().points),
        'cp_second': plain(second.to_counting_measure().points),
        'poisson': plain(poisson.points),
        'cp_first_mass': first.total_mass,
    }


REPLICATIONS = {
    'delaunay-angles': angle_replication,
    'nn-gp': nn_replication,
    'mardia': mardia_replication,
    'cp-compare': cp_compare_replication,
}


def _guarded(func, settings, index):
    """(record, None), or (None, 'ErrorType: message') when the replication raised."""
    try:
        return func(settings, index), None
    except Exception as e:
        return None, '%s: %s' % (type(e).__name__, e)


def run_replications(func, settings, count, workers=1):
    """Records of replications 0 .. count-1, sorted by index."""
    if workers <= 1:
        outcomes = []
        for index in range(count):
            outcomes.append(_guarded(func, settings, index))
            if outcomes[-1][1] is not None:
                break
    else:
        outcomes = Parallel(n_jobs=workers)(
            delayed(_guarded)(func, settings, index) for index in range(count))
    records = [record for record, error in outcomes if error is None]
    failed = [(index, error) for index, (record, error) in enumerate(outcomes) if error is not None]
    if failed:
        index, error = failed[0]
        logger.warning("%d of %d replications failed", len(failed), len(outcomes))
        raise StudyFailed("replication %d failed: %s" % (index, error), partial=records)
    return records


##
# Aggregation

def _count_law_block(counts, target):
    law = metrics.empirical_count_pmf(counts)
    return {'empirical': plain(law), 'limit': plain(target), 'tv': metrics.tv(law, target)}


def _angle_aggregates(settings, records, reference):
    n, tau = settings['n'], settings['tau']
    counts = [r['count'] for r in records]
    mean, se = mean_se(counts)
    zeros = [1.0 if c == 0 else 0.0 for c in counts]
    zero_freq, zero_se = mean_se(zeros)
    v = exceedances.angle_threshold(n, tau)
    clear = [1.0 if r['min_angle'] >= v else 0.0 for r in records]
    clear_freq, clear_se = mean_se(clear)
    limit = analytic.cp_limit_params(tau)
    multiplicities = [m for r in records for m in r['multiplicities']]
    sizes = [s for r in records for s in r['component_sizes']]
    out = {
        'tau': tau,
        'v_n': v,
        'c_n': _c_n(settings),
        'mean_count': mean,
        'mean_count_se': se,
        'expected_count': analytic.expected_angle_exceedances(n, v),
        'zero_frequency': zero_freq,
        'zero_frequency_se': zero_se,
        'zero_limit': math.exp(-limit.gamma),
        'min_angle_clear_frequency': clear_freq,
        'min_angle_clear_frequency_se': clear_se,
        'theta_limit': limit.theta,
        'count_law': _count_law_block(counts, metrics.cp_count_pmf(limit.cluster_masses())),
        'atoms': len(multiplicities),
        'clusters': len(sizes),
    }
    if multiplicities:
        p_hat = metrics.empirical_count_pmf(multiplicities)
        out['theta_hat'] = len(sizes) / float(len(multiplicities))
        out['p_hat'] = plain(p_hat)
        out['p_hat_3plus'] = math.fsum(p_hat[i] for i in range(3, len(p_hat)))
        out['Q_hat'] = plain(metrics.empirical_count_pmf(sizes))
    m = min(len(records), len(reference.get('cp_limit', [])))
    if m:
        out['d2_to_limit'] = metrics.empirical_d2(_patterns(records[:m]),
                                                  _patterns(reference['cp_limit'][:m], 'points'))
        out['d2_samples'] = m
    return out


def _nn_aggregates(settings, records, reference):
    n, tau = settings['n'], settings['tau']
    params = _gp_params(settings)
    counts = [r['count'] for r in records]
    mean, se = mean_se(counts)
    v = exceedances.nn_threshold_numeric(n, tau, params)
    out = {
        'tau': tau,
        'v_n': v,
        'mean_count': mean,
        'mean_count_se': se,
        'expected_count': analytic.nn_expected_exceedances(n, v, params),
        'count_law': _count_law_block(counts, metrics.cp_count_pmf([(1, tau)])),
        'order_statistics': {},
        'thresholds': threshold_row(n, tau, params),
    }
    for k in settings['order_ks']:
        hits = [1.0 if r['order_events'][str(k)] else 0.0 for r in records]
        freq, freq_se = mean_se(hits)
        agree = all((r['kth_nn'][str(k)] <= v) == r['order_events'][str(k)] for r in records)
        out['order_statistics'][str(k)] = {
            'frequency': freq,
            'frequency_se': freq_se,
            'limit': analytic.poisson_partial_sum(tau, k),
            'kth_nn_agrees': agree,
        }
    return out


def _mardia_aggregates(settings, records, reference):
    counts = np.sum([r['bin_counts'] for r in records], axis=0)
    draws = sum(r['draws'] for r in records)
    expected = np.full(MARDIA_BINS, draws / float(MARDIA_BINS))
    chi2 = stats.chisquare(counts, expected)
    out = {
        'draws': draws,
        'bins': MARDIA_BINS,
        'chi2_statistic': float(chi2.statistic),
        'chi2_pvalue': float(chi2.pvalue),
        'small_angles': {},
    }
    for v in MARDIA_SMALL_ANGLES:
        below = sum(r['below'][repr(v)] for r in records)
        freq = below / float(draws)
        out['small_angles'][repr(v)] = {
            'frequency': freq,
            'frequency_se': math.sqrt(freq * (1.0 - freq) / draws),
            'cdf': analytic.mardia_cdf(v),
            'ratio_to_leading_term': freq / (2.0 * v * v),
        }
    harvested = reference.get('tessellation_min_angles') or []
    typical = reference.get('typical_min_angles') or []
    out['tessellation_triangles'] = len(harvested)
    if harvested and typical:
        ks = stats.ks_2samp(harvested, typical)
        out['tessellation_ks_statistic'] = float(ks.statistic)
        out['tessellation_ks_pvalue'] = float(ks.pvalue)
    return out


def _d2_batches(first, second, batches):
    m = len(first)
    size = m // batches
    if size < 1:
        return []
    return [metrics.empirical_d2(first[b * size:(b + 1) * size], second[b * size:(b + 1) * size])
            for b in range(batches)]


def _cp_compare_aggregates(settings, records, reference):
    tau = settings['tau']
    first = _patterns(records, 'cp_first')
    second = _patterns(records, 'cp_second')
    poisson = _patterns(records, 'poisson')
    self_d2 = metrics.empirical_d2(first, second)
    cross_d2 = metrics.empirical_d2(first, poisson)
    diffs = [c - s for c, s in zip(_d2_batches(first, poisson, D2_BATCHES),
                                  _d2_batches(first, second, D2_BATCHES))]
    diff_mean, diff_se = mean_se(diffs)
    limit = analytic.cp_limit_params(tau)
    masses = [r['cp_first_mass'] for r in records]
    out = {
        'tau': tau,
        'samples': len(records),
        'self_d2': self_d2,
        'cross_d2': cross_d2,
        'batch_difference_mean': diff_mean,
        'batch_difference_se': diff_se,
        'mass_law': _count_law_block(masses, metrics.cp_count_pmf(limit.cluster_masses())),
    }
    if diff_se is not None:
        out['separated'] = cross_d2 - self_d2 >= 3.0 * diff_se
    return out


AGGREGATES = {
    'delaunay-angles': _angle_aggregates,
    'nn-gp': _nn_aggregates,
    'mardia': _mardia_aggregates,
    'cp-compare': _cp_compare_aggregates,
}


def aggregate(kind, settings, records, reference):
    if kind == 'thresholds':
        return {'rows': records}
    return plain(AGGREGATES[kind](settings, records, reference))


def recompute_aggregates(report):
    return aggregate(report.kind, report.config, report.replications, report.reference)


##
# Threshold comparison

def _attempt(func, *args):
    try:
        return func(*args), None
    except (RadicandNegative, BelowFormulaRegime, NoRootInBracket) as e:
        logger.warning("%s at n=%g: %s", type(e).__name__, args[0], e)
        return None, type(e).__name__


def threshold_row(n, tau, params):
    closed, closed_error = _attempt(exceedances.nn_threshold_closed_form, n, tau, params)
    numeric, numeric_error = _attempt(exceedances.nn_threshold_numeric, n, tau, params)
    row = {
        'n': n,
        'tau': tau,
        'nn_closed_form': closed,
        'nn_numeric': numeric,
        'ratio': numeric / closed if closed and numeric else None,
        'angle': exceedances.angle_threshold(n, tau),
    }
    if closed_error:
        row['nn_closed_form_error'] = closed_error
    if numeric_error:
        row['nn_numeric_error'] = numeric_error
    else:
        row['nn_expected_count'] = analytic.nn_expected_exceedances(n, numeric, params)
    return row


##
# Studies

def _run(kind, config, count, reference=None):
    settings = config.to_dict()
    if settings['kind'] != kind:
        raise PreconditionViolation("config kind %r cannot run the %s study"
                                    % (settings['kind'], kind))
    workers = min(resolve_workers(settings.get('workers')), max(1, count))
    logger.info("%s config:\n%s", kind, config)
    logger.info("%s study: %d replications on %d worker(s)", kind, count, workers)
    started = datetime.now(timezone.utc)
    clock = time.time()
    reference = reference or {}
    seeds = {'master_seed': settings['master_seed'], 'mixing': 'splitmix64', 'generator': 'PCG64'}

    def report(records, aggregates, status):
        return ExperimentReport(kind=kind, config=settings, replications=records,
                                aggregates=aggregates, reference=reference, seeds=seeds,
                                software_version=_version(),
                                timestamp={'started': started.isoformat(),
                                           'wall_clock_seconds': time.time() - clock},
                                status=status)

    try:
        records = run_replications(REPLICATIONS[kind], settings, count, workers)
    except StudyFailed as e:
        e.partial = report(e.partial, {}, 'failed')
        raise
    result = report(records, aggregate(kind, settings, records, reference), 'complete')
    logger.info("%s study finished in %.1f s", kind, result.timestamp['wall_clock_seconds'])
    return result


def run_delaunay_angle_study(config):
    settings = config.to_dict()
    m = min(settings['d2_samples'], settings['replications'])
    seed = _reference_seed(settings)
    limit = [{'points': plain(sampling.sample_cp_limit(settings['tau'], seed.replicate(i))
                              .to_counting_measure().points)} for i in range(m)]
    return _run('delaunay-angles', config, settings['replications'], {'cp_limit': limit})


def run_nn_gp_study(config):
    settings = config.to_dict()
    return _run('nn-gp', config, settings['replications'])


def _harvest_tessellation(settings):
    """Minimum angles of interior triangles of one large Poisson tessellation."""
    n, guard = settings['n'], settings['guard']
    window = Window.from_scale(n)
    seed = _reference_seed(settings)
    points = sampling.sample_poisson(1.0, window.dilate(guard), seed)
    tri = triangulate(points, method=settings['delaunay_backend'])
    harvested = tri.min_angles[interior_mask(tri, window, guard)]
    typical = sampling.typical_min_angles(len(harvested), Seed(seed.mixed(1)))
    return {'tessellation_min_angles': plain(harvested), 'typical_min_angles': plain(typical)}


def run_mardia_study(config):
    settings = config.to_dict()
    return _run('mardia', config, settings['replications'], _harvest_tessellation(settings))


def run_cp_compare_study(config):
    settings = config.to_dict()
    return _run('cp-compare', config, settings['d2_samples'])


def run_threshold_study(config):
    settings = config.to_dict()
    if settings['kind'] != 'thresholds':
        raise PreconditionViolation("config kind %r cannot run the thresholds study"
                                    % (settings['kind'],))
    logger.info("thresholds config:\n%s", config)
    params = _gp_params(settings)
    started = datetime.now(timezone.utc)
    clock = time.time()
    rows = [plain(threshold_row(n, settings['tau'], params)) for n in settings['threshold_grid']]
    return ExperimentReport(kind='thresholds', config=settings, replications=rows,
                            aggregates=aggregate('thresholds', settings, rows, {}),
                            seeds={'master_seed': settings['master_seed']},
                            software_version=_version(),
                            timestamp={'started': started.isoformat(),
                                       'wall_clock_seconds': time.time() - clock})


STUDIES = {
    'delaunay-angles': run_delaunay_angle_study,
    'nn-gp': run_nn_gp_study,
    'mardia': run_mardia_study,
    'cp-compare': run_cp_compare_study,
    'thresholds': run_threshold_study,
}


def run_study(config):
    try:
        study = STUDIES[config.kind]
    except KeyError:
        raise PreconditionViolation("unknown study kind %r" % (config.kind,))
    return study(config)


@lru_cache(maxsize=4)
def _bin_edges(bins):
    return tuple([0.0] + [analytic.mardia_quantile(k / float(bins)) for k in range(1, bins)]
                 + [analytic.PI_3])


def mardia_bin_edges(bins=MARDIA_BINS):
    """Equal-probability bin edges of the minimum-angle law."""
    return np.array(_bin_edges(int(bins)))
