#
# Distances between finite point patterns (d1, d_hat1, an empirical d2) and
# between count laws (total variation), together with the count law of a
# compound Poisson process.
#
# Patterns are anything exposing `.points` as an (m, 2) array, or an array
# itself; multiplicities are repeated rows.

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.optimize import linear_sum_assignment

from palm_extremes.exceptions import (CutoffTooSmall, PreconditionViolation,
                                      SizeMismatch, TooLarge)
from palm_extremes.geometry import d0_matrix

logger = logging.getLogger(__name__)

PMF_SUM_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-12
MAX_TAIL = 1e-9
BRUTEFORCE_LIMIT = 8


class Pmf(object):
    """
    Finitely supported law on {0, 1, 2, ...}.

    `tail` is the probability mass deliberately discarded beyond the last
    stored index; stored entries plus tail sum to one.
    """

    def __init__(self, probs, tail=0.0):
        probs = np.asarray(probs, dtype=float).ravel()
        if probs.size == 0:
            raise PreconditionViolation("a Pmf needs at least one entry")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise PreconditionViolation("Pmf entries must be finite and non-negative")
        if tail < 0 or abs(math.fsum(probs) + tail - 1.0) > PMF_SUM_TOL:
            raise PreconditionViolation("Pmf entries sum to %r with tail %r, expected 1"
                                        % (math.fsum(probs), tail))
        # trailing zeros carry no information
        last = np.flatnonzero(probs)
        self.probs = probs[:last[-1] + 1] if last.size else probs[:1]
        self.probs.setflags(write=False)
        self.tail = float(tail)

    @classmethod
    def from_dict(cls, mapping, tail=0.0):
        if not mapping:
            raise PreconditionViolation("empty mapping")
        top = max(int(k) for k in mapping)
        probs = np.zeros(top + 1)
        for k, p in mapping.items():
            if int(k) < 0:
                raise PreconditionViolation("Pmf support must be non-negative, got %r" % (k,))
            probs[int(k)] += p
        return cls(probs, tail)

    @classmethod
    def point_mass(cls, k):
        return cls.from_dict({int(k): 1.0})

    def __getitem__(self, k):
        if 0 <= k < self.probs.size:
            return float(self.probs[k])
        return 0.0

    def __len__(self):
        return self.probs.size

    def support(self):
        return [int(k) for k in np.flatnonzero(self.probs)]

    def mean(self):
        return math.fsum(k * p for k, p in enumerate(self.probs))

    def as_dict(self):
        return dict((k, float(self.probs[k])) for k in self.support())

    def __repr__(self):
        return "Pmf(%r, tail=%r)" % (self.as_dict(), self.tail)


@dataclass(frozen=True)
class MatchResult(object):
    value: float
    assignment: tuple


def _as_points(pattern):
    pts = getattr(pattern, 'points', pattern)
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def _mean_cost(cost, rows, cols, mass):
    return math.fsum(cost[rows, cols]) / mass


def d1(mu, chi):
    """
    Normalised optimal matching distance under d0.  Unequal masses are at
    distance 1, two empty patterns at distance 0.
    """
    xs, ys = _as_points(mu), _as_points(chi)
    if len(xs) != len(ys):
        return MatchResult(1.0, ())
    m = len(xs)
    if m == 0:
        return MatchResult(0.0, ())
    cost = d0_matrix(xs, ys)
    rows, cols = linear_sum_assignment(cost)
    return MatchResult(_mean_cost(cost, rows, cols, m),
                       tuple((int(i), int(j)) for i, j in zip(rows, cols)))


def d1_bruteforce(mu, chi):
    """d1 by enumerating every permutation; an oracle for small patterns."""
    xs, ys = _as_points(mu), _as_points(chi)
    if len(xs) != len(ys):
        return 1.0
    m = len(xs)
    if m > BRUTEFORCE_LIMIT:
        raise TooLarge("brute force limited to %d points, got %d" % (BRUTEFORCE_LIMIT, m))
    if m == 0:
        return 0.0
    cost = d0_matrix(xs, ys)
    rows = np.arange(m)
    return min(_mean_cost(cost, rows, np.asarray(perm), m)
               for perm in itertools.permutations(range(m)))


def d_hat1(mu, chi):
    """
    Best injection of the smaller pattern into the larger one, averaged over
    the smaller mass.  Zero when either pattern is empty.
    """
    xs, ys = _as_points(mu), _as_points(chi)
    if len(xs) > len(ys):
        xs, ys = ys, xs
    k = len(xs)
    if k == 0:
        return 0.0
    cost = d0_matrix(xs, ys)
    rows, cols = linear_sum_assignment(cost)
    return _mean_cost(cost, rows, cols, k)


def d1_cost_matrix(samples_a, samples_b):
    arrays_a = [_as_points(s) for s in samples_a]
    arrays_b = [_as_points(s) for s in samples_b]
    cost = np.ones((len(arrays_a), len(arrays_b)))
    for i, xs in enumerate(arrays_a):
        for j, ys in enumerate(arrays_b):
            if len(xs) == len(ys):
                cost[i, j] = d1(xs, ys).value
    return cost


def empirical_d2(samples_a, samples_b):
    """
    Optimal transport between two equally sized empirical clouds of
    patterns with ground cost d1.
    """
    if len(samples_a) != len(samples_b):
        raise SizeMismatch("sample sets have sizes %d and %d" % (len(samples_a), len(samples_b)))
    m = len(samples_a)
    if m == 0:
        raise PreconditionViolation("empirical_d2 needs at least one sample per side")
    cost = d1_cost_matrix(samples_a, samples_b)
    rows, cols = linear_sum_assignment(cost)
    return min(1.0, _mean_cost(cost, rows, cols, m))


def tv(p, q):
    """Total variation distance between two count laws."""
    size = max(len(p), len(q))
    pp = np.zeros(size)
    qq = np.zeros(size)
    pp[:len(p)] = p.probs
    qq[:len(q)] = q.probs
    return min(1.0, 0.5 * math.fsum(np.abs(pp - qq)))


def _cp_convolution(masses, cutoff):
    pmf = np.zeros(cutoff + 1)
    pmf[0] = 1.0
    for size, mass in masses:
        ks = np.arange(cutoff // size + 1)
        component = np.zeros(cutoff + 1)
        component[ks * size] = stats.poisson.pmf(ks, mass)
        pmf = np.convolve(pmf, component)[:cutoff + 1]
    return pmf, max(0.0, 1.0 - math.fsum(pmf))


def cp_count_pmf(cluster_masses, cutoff=None):
    """
    Law of sum_i i * N_i with independent N_i ~ Poisson(mass_i).

    Without an explicit cutoff the support is extended until the discarded
    tail is below 1e-12.
    """
    masses = []
    for size, mass in cluster_masses:
        if int(size) != size or size < 1:
            raise PreconditionViolation("cluster sizes must be positive integers, got %r" % (size,))
        if not mass > 0:
            raise PreconditionViolation("cluster masses must be positive, got %r" % (mass,))
        masses.append((int(size), float(mass)))
    if not masses:
        return Pmf.point_mass(0)

    if cutoff is None:
        cutoff = 16
        pmf, tail = _cp_convolution(masses, cutoff)
        while tail >= DEFAULT_TAIL_TOL:
            cutoff *= 2
            pmf, tail = _cp_convolution(masses, cutoff)
    else:
        pmf, tail = _cp_convolution(masses, int(cutoff))
        if tail >= MAX_TAIL:
            raise CutoffTooSmall("cutoff %d leaves tail mass %.3g" % (cutoff, tail))
    logger.debug("cp_count_pmf: cutoff %d, tail %.3g", cutoff, tail)
    # absorb rounding so entries plus tail sum to one
    return Pmf(pmf, tail=max(0.0, 1.0 - math.fsum(pmf)))


def empirical_count_pmf(samples):
    counts = np.asarray(list(samples), dtype=int)
    if counts.size == 0:
        raise PreconditionViolation("empirical_count_pmf needs at least one sample")
    if np.any(counts < 0):
        raise PreconditionViolation("counts must be non-negative")
    freq = np.bincount(counts) / float(counts.size)
    return Pmf(freq, tail=max(0.0, 1.0 - math.fsum(freq)))
