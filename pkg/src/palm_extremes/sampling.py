#
# Seeded samplers: homogeneous Poisson, Gauss-Poisson and compound Poisson
# processes, the Gauss-Poisson Palm version and the typical Poisson-Delaunay
# triangle.
#
# Every sampler is a pure function of its arguments and a Seed; the same
# (params, window, Seed) gives a bit-identical sample.

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from palm_extremes import analytic
from palm_extremes.exceptions import PreconditionViolation, WindowExcludesOrigin
from palm_extremes.geometry import ORIGIN, Point, Triangle, Window, angles_of
from palm_extremes.metrics import Pmf

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15
# Half the diameter of a two-point Gauss-Poisson cluster.
GP_GUARD = 0.5
# Area of the equilateral triangle inscribed in the unit circle.
MAX_INSCRIBED_AREA = 3.0 * math.sqrt(3.0) / 4.0


def splitmix64(x):
    """SplitMix64 finaliser: a 64-bit avalanche mix."""
    z = (x + GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class Seed(object):
    """
    Master seed plus replication index.  The generator state is
    splitmix64(splitmix64(value) ^ splitmix64(index + stream * 2^32)),
    so replications and sub-streams of one master seed are independent.
    """
    value: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= self.value <= MASK64:
            raise PreconditionViolation("seed value must be a 64-bit unsigned integer")
        if self.replication_index < 0:
            raise PreconditionViolation("replication index must be non-negative")

    def mixed(self, stream=0):
        tag = (self.replication_index + (stream << 32)) & MASK64
        return splitmix64(splitmix64(self.value) ^ splitmix64(tag))

    def rng(self, stream=0):
        return np.random.Generator(np.random.PCG64(self.mixed(stream)))

    def replicate(self, index):
        return Seed(self.value, index)


class CountingMeasure(object):
    """
    Finite multiset of planar points.

    `region` is the window the pattern was sampled on; None means the
    pattern is complete (there are no unobserved points anywhere).
    """

    def __init__(self, points=None, region=None):
        if points is None:
            points = np.empty((0, 2))
        elif isinstance(points, (list, tuple)):
            points = [tuple(Point.coerce(p)) for p in points]
        pts = np.array(getattr(points, 'points', points), dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise PreconditionViolation("point coordinates must be finite")
        pts.setflags(write=False)
        self.points = pts
        self.region = region

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        for x, y in self.points:
            yield Point(float(x), float(y))

    def __eq__(self, other):
        return (isinstance(other, CountingMeasure) and self.region == other.region
                and np.array_equal(self.points, other.points))

    def __repr__(self):
        return "CountingMeasure(%d points, region=%r)" % (len(self), self.region)

    def count(self, window):
        return int(np.count_nonzero(window.contains(self.points)))

    def contains_point(self, point):
        return bool(np.any(np.all(self.points == Point.coerce(point).as_array(), axis=1)))


@dataclass(frozen=True)
class GaussPoissonParams(object):
    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        if abs(self.p0 + self.p1 + self.p2 - 1.0) > 1e-12:
            raise PreconditionViolation("p0 + p1 + p2 must equal 1, got %r"
                                        % (self.p0 + self.p1 + self.p2,))
        if not (self.p0 > 0 and self.p1 > 0 and self.p2 >= 0):
            raise PreconditionViolation("need p0 > 0, p1 > 0 and p2 >= 0")

    @classmethod
    def from_p1_p2(cls, p1, p2):
        return cls(1.0 - p1 - p2, p1, p2)

    @property
    def gamma(self):
        """Intensity p1 + 2 p2."""
        return self.p1 + 2.0 * self.p2

    @property
    def pair_probability(self):
        """Probability that the typical point sits in a two-point cluster."""
        return 2.0 * self.p2 / self.gamma


@dataclass(frozen=True)
class CompoundParams(object):
    intensity: float
    cluster_law: Pmf

    def __post_init__(self):
        if not self.intensity > 0:
            raise PreconditionViolation("compound intensity must be positive")
        if self.cluster_law[0] != 0.0:
            raise PreconditionViolation("cluster sizes must be at least 1")
        if self.cluster_law.tail > 0.0:
            raise PreconditionViolation("cluster law must be finitely supported")


class MarkedPattern(object):
    """Cluster centres with positive integer multiplicities."""

    def __init__(self, centers, marks, region=None):
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        self.marks = np.asarray(marks, dtype=int).ravel()
        self.region = region

    def __len__(self):
        return self.marks.size

    def __iter__(self):
        for (x, y), m in zip(self.centers, self.marks):
            yield Point(float(x), float(y)), int(m)

    @property
    def total_mass(self):
        return int(self.marks.sum())

    def to_counting_measure(self):
        return CountingMeasure(np.repeat(self.centers, self.marks, axis=0), self.region)


@dataclass(frozen=True)
class TypicalTriangle(object):
    R: float
    U1: Point
    U2: Point
    U3: Point

    def vertices(self):
        return tuple(Point(self.R * u.x, self.R * u.y) for u in (self.U1, self.U2, self.U3))

    def triangle(self):
        return Triangle.from_vertices(*self.vertices())

    @property
    def min_angle(self):
        u = np.array([tuple(self.U1), tuple(self.U2), tuple(self.U3)])
        return float(angles_of(u[None, 0], u[None, 1], u[None, 2]).min())


def _poisson_points(intensity, window, rng):
    count = rng.poisson(intensity * window.area)
    return window.sample_uniform(rng, count)


def sample_poisson(intensity, window, seed):
    if not (intensity > 0 and math.isfinite(intensity)):
        raise PreconditionViolation("intensity must be positive, got %r" % (intensity,))
    return CountingMeasure(_poisson_points(intensity, window, seed.rng()), window)


def _gauss_poisson_points(params, window, rng, guard):
    parents = _poisson_points(1.0, window.dilate(guard), rng)
    kinds = rng.choice(3, size=len(parents), p=[params.p0, params.p1, params.p2])
    singles = parents[kinds == 1]
    centers = parents[kinds == 2]
    theta = rng.uniform(0.0, 2.0 * math.pi, size=len(centers))
    half = 0.5 * np.column_stack([np.cos(theta), np.sin(theta)])
    pts = np.vstack([singles, centers + half, centers - half])
    return pts[window.contains(pts)]


def sample_gauss_poisson(params, window, seed, guard=GP_GUARD):
    """
    Gauss-Poisson process restricted to `window`.  Parents are drawn on the
    window dilated by `guard`, so the restriction is exactly stationary for
    any guard >= 1/2.
    """
    return CountingMeasure(_gauss_poisson_points(params, window, seed.rng(), guard), window)


def _palm_cluster_points(params, rng):
    if rng.random() < params.p1 / params.gamma:
        return np.zeros((1, 2))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([[0.0, 0.0], [math.cos(theta), math.sin(theta)]])


def gp_palm_cluster(params, seed):
    """
    Cluster of the typical point: the origin alone, or the origin with a
    partner at unit distance with probability 2 p2 / (p1 + 2 p2).
    """
    return CountingMeasure(_palm_cluster_points(params, seed.rng()))


def sample_palm_gauss_poisson(params, window, seed, guard=GP_GUARD):
    """Palm version at the origin: independent process plus origin cluster."""
    if not window.contains(ORIGIN):
        raise WindowExcludesOrigin("window %r does not contain the origin" % (window,))
    background = _gauss_poisson_points(params, window, seed.rng(0), guard)
    cluster = _palm_cluster_points(params, seed.rng(1))
    cluster = cluster[window.contains(cluster)]
    return CountingMeasure(np.vstack([cluster, background]), window)


def sample_compound_poisson(params, window, seed):
    rng = seed.rng()
    centers = _poisson_points(params.intensity, window, rng)
    sizes = np.asarray(params.cluster_law.support(), dtype=int)
    weights = np.array([params.cluster_law[k] for k in sizes])
    marks = rng.choice(sizes, size=len(centers), p=weights / weights.sum())
    return MarkedPattern(centers, marks, window)


def sample_cp_limit(tau, seed):
    """Limiting compound Poisson process of small Delaunay angles on W_1."""
    limit = analytic.cp_limit_params(tau)
    return sample_compound_poisson(CompoundParams(limit.gamma, limit.Q),
                                   Window.from_scale(1.0), seed)


def _inscribed_areas(u):
    # u: (k, 3, 2) unit vectors
    e1 = u[:, 1] - u[:, 0]
    e2 = u[:, 2] - u[:, 0]
    return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _typical_directions(rng, count):
    accepted = [np.empty((0, 3, 2))]
    remaining = count
    while remaining > 0:
        # acceptance rate is (3 / 2pi) / MAX_INSCRIBED_AREA, about 0.37
        batch = max(16, int(remaining * 2.9))
        phi = rng.uniform(0.0, 2.0 * math.pi, size=(batch, 3))
        u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        keep = rng.uniform(0.0, MAX_INSCRIBED_AREA, size=batch) < _inscribed_areas(u)
        u = u[keep][:remaining]
        accepted.append(u)
        remaining -= len(u)
    return np.concatenate(accepted, axis=0)


def sample_typical_triangles(count, seed):
    """
    Vectorised typical-triangle draws at intensity 1.  Returns circumradii
    (count,) and vertex directions (count, 3, 2).
    """
    rng = seed.rng()
    radii = np.sqrt(rng.gamma(shape=2.0, scale=1.0 / math.pi, size=int(count)))
    return radii, _typical_directions(rng, int(count))


def typical_min_angles(count, seed):
    _, u = sample_typical_triangles(count, seed)
    return angles_of(u[:, 0], u[:, 1], u[:, 2]).min(axis=1)


def sample_typical_triangle(seed):
    """
    R^2 ~ Gamma(2, rate pi), directions on the circle with density
    proportional to the inscribed area; R independent of the directions.
    """
    radii, u = sample_typical_triangles(1, seed)
    return TypicalTriangle(float(radii[0]), *(Point(float(x), float(y)) for x, y in u[0]))
