#
# Exceedance processes of the two applications: points of a Gauss-Poisson
# sample whose nearest neighbour is far away, and Delaunay triangles with a
# small minimum angle.  Atoms are the (rescaled) locations of exceedances;
# cluster_decompose splits them by how many other exceedances sit nearby.

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from palm_extremes import analytic
from palm_extremes.delaunay import triangulate
from palm_extremes.exceptions import (BelowFormulaRegime, DegenerateConfiguration,
                                      GuardTooSmall, NoRootInBracket, PreconditionViolation,
                                      RadicandNegative, TooFewPoints)
from palm_extremes.geometry import Window
from palm_extremes.metrics import empirical_count_pmf
from palm_extremes.spatial_index import UniformGrid

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-12
ROOT_RESIDUAL = 1e-10
DEFAULT_ANGLE_GUARD = 3.0


def _require_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise PreconditionViolation("%s must be positive and finite, got %r" % (name, value))


@dataclass(frozen=True)
class ExceedanceProcess(object):
    """
    Exceedances in W_n.  atoms_rescaled = n^(-1/2) * centers_raw, computed
    by a single multiplication so the two stay bit-consistent.
    """
    n: float
    threshold: float
    centers_raw: np.ndarray
    atoms_rescaled: np.ndarray = field(default=None)

    def __post_init__(self):
        centers = np.asarray(self.centers_raw, dtype=float).reshape(-1, 2)
        centers.setflags(write=False)
        atoms = centers * self.n ** -0.5
        atoms.setflags(write=False)
        object.__setattr__(self, 'centers_raw', centers)
        object.__setattr__(self, 'atoms_rescaled', atoms)

    def __len__(self):
        return self.centers_raw.shape[0]

    @property
    def count(self):
        return len(self)


@dataclass(frozen=True)
class ClusterStats(object):
    multiplicities: np.ndarray
    component_sizes: np.ndarray
    counts_by_i: dict
    p_hat: object = None
    Q_hat: object = None
    theta_hat: float = None

    @property
    def atoms(self):
        return int(self.multiplicities.size)

    @property
    def clusters(self):
        return int(self.component_sizes.size)


@dataclass(frozen=True)
class AnalyticThresholds(object):
    tau: float
    gamma_n: float
    v_n: float


##
# Thresholds

def angle_threshold(n, tau):
    """v_n = sqrt(tau / n) / 2, so that 2n P(min angle < v_n) is about tau."""
    _require_positive('n', n)
    _require_positive('tau', tau)
    return 0.5 * math.sqrt(tau / n)


def nn_threshold_closed_form(n, tau, params):
    _require_positive('n', n)
    _require_positive('tau', tau)
    p1, p2 = analytic.void_weights(params)
    radicand = (8.0 * p2 * p2 + 8.0 * math.pi * (p1 + p2)
                * (math.log(p1 / (p1 + 2.0 * p2)) + math.log(n) - math.log(tau)))
    if radicand < 0:
        raise RadicandNegative("closed-form threshold radicand is %r for n=%r, tau=%r"
                               % (radicand, n, tau))
    v = (4.0 * p2 + math.sqrt(radicand)) / (4.0 * math.pi * (p1 + p2))
    if v < 1.0:
        raise BelowFormulaRegime("closed-form threshold %r lies below 1" % (v,))
    return v


def nn_threshold_numeric(n, tau, params):
    """Root of n * gp_void_prob(v) = tau by bisection."""
    _require_positive('n', n)
    _require_positive('tau', tau)

    def excess(v):
        return n * analytic.gp_void_prob(v, params) - tau

    if excess(0.0) <= 0:
        raise NoRootInBracket("n=%r does not exceed tau=%r" % (n, tau))
    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise NoRootInBracket("no sign change below v=%r" % (hi,))
    lo = 0.0 if hi == 1.0 else hi / 2.0
    root = optimize.bisect(excess, lo, hi, xtol=ROOT_XTOL)
    residual = abs(n * analytic.gp_void_prob(root, params) - tau) / tau
    if residual > ROOT_RESIDUAL:
        # the void probability jumps at v = 1 and tau can fall into the gap
        raise NoRootInBracket("n * void(v) skips tau=%r near v=%r (relative residual %.3g)"
                              % (tau, root, residual))
    return root


def angle_thresholds(n, tau):
    v = angle_threshold(n, tau)
    return AnalyticThresholds(tau=tau, gamma_n=2.0 * analytic.mardia_cdf(v), v_n=v)


def nn_thresholds(n, tau, params):
    v = nn_threshold_numeric(n, tau, params)
    p1, p2 = analytic.void_weights(params)
    return AnalyticThresholds(tau=tau, gamma_n=(p1 + 2.0 * p2) * analytic.gp_void_prob(v, params),
                              v_n=v)


##
# Exceedance processes

def _points_of(xi):
    return np.asarray(getattr(xi, 'points', xi), dtype=float).reshape(-1, 2)


def _check_region(xi, needed):
    region = getattr(xi, 'region', None)
    if region is not None and not region.contains_window(needed, slack=1e-12 * needed.half_side):
        raise GuardTooSmall("sample region half side %r is smaller than the %r required"
                            % (region.half_side, needed.half_side))


def nn_exceedances(xi, n, v):
    """Points of xi in W_n whose nearest other point of xi is farther than v."""
    _require_positive('n', n)
    if v < 0:
        raise PreconditionViolation("threshold must be non-negative, got %r" % (v,))
    window = Window.from_scale(n)
    _check_region(xi, window.dilate(v))
    pts = _points_of(xi)
    inside = np.flatnonzero(window.contains(pts))
    grid = UniformGrid(pts, v if v > 0 else 1.0)
    crowded = grid.neighbour_counts(inside, v) > 0
    return ExceedanceProcess(n, v, pts[inside[~crowded]])


def angle_exceedances(points, n, v, guard=DEFAULT_ANGLE_GUARD, tri=None, method='bowyer-watson'):
    """
    Circumcenters in W_n of Delaunay triangles with minimum angle below v.
    A qualifying triangle whose circumdisk leaves the sampled region raises
    GuardTooSmall.
    """
    _require_positive('n', n)
    window = Window.from_scale(n)
    _check_region(points, window.dilate(guard))
    if tri is None:
        try:
            tri = triangulate(points, method=method)
        except (TooFewPoints, DegenerateConfiguration) as e:
            logger.debug("no Delaunay triangles: %s", e)
            return ExceedanceProcess(n, v, np.empty((0, 2)))
    qualifying = window.contains(tri.circumcenters) & (tri.min_angles < v)
    region = getattr(points, 'region', None)
    if region is not None:
        escaped = qualifying & ~region.contains_disks(tri.circumcenters, tri.circumradii)
        if np.any(escaped):
            logger.warning("guard %g too small at n=%g", guard, n)
            raise GuardTooSmall("%d small-angle triangles have circumdisks leaving the sampled"
                                " region" % np.count_nonzero(escaped))
    return ExceedanceProcess(n, v, tri.circumcenters[qualifying])


def cluster_decompose(proc, c_n):
    """
    Multiplicity of an atom is the number of atoms (itself included) whose
    raw centres lie within c_n of its raw centre.  Clusters are the
    connected components of that proximity graph.
    """
    _require_positive('c_n', c_n)
    centers = proc.centers_raw
    m = len(centers)
    if m == 0:
        return ClusterStats(np.empty(0, dtype=int), np.empty(0, dtype=int), {})
    qi, pj = UniformGrid(centers, c_n).pairs_within(centers, c_n)
    multiplicities = np.bincount(qi, minlength=m)
    graph = coo_matrix((np.ones(len(qi)), (qi, pj)), shape=(m, m)).tocsr()
    ncomp, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels, minlength=ncomp)
    counts_by_i = dict((int(i), int(c)) for i, c in enumerate(np.bincount(multiplicities)) if c)
    return ClusterStats(multiplicities=multiplicities, component_sizes=sizes,
                        counts_by_i=counts_by_i, p_hat=empirical_count_pmf(multiplicities),
                        Q_hat=empirical_count_pmf(sizes), theta_hat=ncomp / float(m))


def order_statistic_test(proc, k):
    """M^(k) <= v_n, equivalently at most k - 1 exceedances."""
    if int(k) != k or k < 1:
        raise PreconditionViolation("k must be a positive integer, got %r" % (k,))
    return len(proc) <= k - 1


def kth_largest_nn_distance(xi, n, k):
    """
    k-th largest nearest-neighbour distance over the points of xi in W_n;
    0 when fewer than k points are inside.
    """
    if int(k) != k or k < 1:
        raise PreconditionViolation("k must be a positive integer, got %r" % (k,))
    pts = _points_of(xi)
    inside = pts[Window.from_scale(n).contains(pts)]
    if len(inside) < k:
        return 0.0
    dist, _ = cKDTree(pts).query(inside, k=2)
    nn = np.sort(dist[:, 1])[::-1]
    return float(nn[int(k) - 1])


def min_angle_in_window(tri, n):
    """Smallest minimum angle over triangles with circumcenter in W_n (pi/3 if none)."""
    mask = Window.from_scale(n).contains(tri.circumcenters)
    if not np.any(mask):
        return analytic.PI_3
    return float(tri.min_angles[mask].min())
