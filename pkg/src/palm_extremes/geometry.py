#
# Planar primitives: points, centred square windows, circumcircles, triangle
# angles, the truncated point distance d0, and the orientation / in-circle
# predicates used by the triangulation.
#
# Everything here is a pure function of immutable values.

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from palm_extremes.exceptions import DegenerateTriangle, PreconditionViolation

# A triple is collinear when |signed area| < DEGENERACY_TOL * diag(bbox)^2.
DEGENERACY_TOL = 1e-12
# Relative band around zero in which predicates switch to exact arithmetic.
PREDICATE_TOL = 1e-12


@dataclass(frozen=True)
class Point(object):
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PreconditionViolation("point coordinates must be finite: (%r, %r)"
                                        % (self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def as_array(self):
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Point):
            return value
        x, y = value
        return cls(float(x), float(y))


ORIGIN = Point(0.0, 0.0)


@dataclass(frozen=True)
class Window(object):
    """
    Centred square [-half_side, half_side]^2.

    `area` is stored rather than recomputed so that W_n built by
    `from_scale(n)` has area exactly n.
    """
    half_side: float
    area: float = field(default=None)

    def __post_init__(self):
        if not (self.half_side > 0 and math.isfinite(self.half_side)):
            raise PreconditionViolation("window half_side must be positive and finite, got %r"
                                        % (self.half_side,))
        if self.area is None:
            object.__setattr__(self, 'area', (2.0 * self.half_side) ** 2)

    @classmethod
    def from_scale(cls, n):
        """W_n = [-n^{1/2}/2, n^{1/2}/2]^2."""
        if not n > 0:
            raise PreconditionViolation("window scale n must be positive, got %r" % (n,))
        return cls(math.sqrt(n) / 2.0, area=float(n))

    @property
    def side(self):
        return 2.0 * self.half_side

    def dilate(self, guard):
        if guard < 0:
            raise PreconditionViolation("guard must be non-negative, got %r" % (guard,))
        if guard == 0:
            return self
        return Window(self.half_side + guard)

    def contains(self, points):
        """Closed-square membership; accepts a Point or an (N, 2) array."""
        if isinstance(points, Point):
            return abs(points.x) <= self.half_side and abs(points.y) <= self.half_side
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.all(np.abs(pts) <= self.half_side, axis=1)

    def contains_window(self, other, slack=0.0):
        return other.half_side <= self.half_side + slack

    def contains_disks(self, centers, radii):
        centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        radii = np.asarray(radii, dtype=float)
        return np.all(np.abs(centers) + radii[:, None] <= self.half_side, axis=1)

    def sample_uniform(self, rng, count):
        return rng.uniform(-self.half_side, self.half_side, size=(int(count), 2))


@dataclass(frozen=True)
class Triangle(object):
    a: Point
    b: Point
    c: Point
    circumcenter: Point
    circumradius: float
    min_angle: float

    @classmethod
    def from_vertices(cls, a, b, c):
        a, b, c = Point.coerce(a), Point.coerce(b), Point.coerce(c)
        center, radius = circumcircle(a, b, c)
        return cls(a, b, c, center, radius, min(triangle_angles(a, b, c)))

    @property
    def vertices(self):
        return (self.a, self.b, self.c)


def _signed_area2(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _check_non_degenerate(a, b, c):
    a, b, c = tuple(a), tuple(b), tuple(c)
    xs = (a[0], b[0], c[0])
    ys = (a[1], b[1], c[1])
    diag2 = (max(xs) - min(xs)) ** 2 + (max(ys) - min(ys)) ** 2
    area = 0.5 * _signed_area2(a, b, c)
    if diag2 == 0.0 or abs(area) < DEGENERACY_TOL * diag2:
        raise DegenerateTriangle("collinear or repeated vertices: %s, %s, %s"
                                 % (tuple(a), tuple(b), tuple(c)))


def circumcircle(a, b, c):
    """Return (center, radius) of the circle through a, b and c."""
    a, b, c = Point.coerce(a), Point.coerce(b), Point.coerce(c)
    _check_non_degenerate(a, b, c)
    bx, by = b.x - a.x, b.y - a.y
    cx, cy = c.x - a.x, c.y - a.y
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return Point(a.x + ux, a.y + uy), math.hypot(ux, uy)


def triangle_angles(a, b, c):
    """Interior angles (at a, at b, at c) in radians, law of cosines."""
    a, b, c = Point.coerce(a), Point.coerce(b), Point.coerce(c)
    _check_non_degenerate(a, b, c)
    la = math.hypot(b.x - c.x, b.y - c.y)
    lb = math.hypot(a.x - c.x, a.y - c.y)
    lc = math.hypot(a.x - b.x, a.y - b.y)

    def angle(opp, s1, s2):
        cos_t = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)
        return math.acos(min(1.0, max(-1.0, cos_t)))

    return angle(la, lb, lc), angle(lb, la, lc), angle(lc, la, lb)


def d0(x, y):
    """Euclidean distance truncated at 1."""
    x, y = Point.coerce(x), Point.coerce(y)
    return min(math.hypot(y.x - x.x, y.y - x.y), 1.0)


def d0_matrix(xs, ys):
    """Pairwise d0 between the rows of two (m, 2) / (k, 2) arrays."""
    xs = np.asarray(xs, dtype=float).reshape(-1, 2)
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    diff = xs[:, None, :] - ys[None, :, :]
    return np.minimum(np.hypot(diff[..., 0], diff[..., 1]), 1.0)


##
# Vectorised forms used on whole triangulations.  a, b, c are (T, 2) arrays.

def circumcircles(a, b, c):
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    bx, by = b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]
    cx, cy = c[:, 0] - a[:, 0], c[:, 1] - a[:, 1]
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return np.column_stack([a[:, 0] + ux, a[:, 1] + uy]), np.hypot(ux, uy)


def angles_of(a, b, c):
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    la = np.hypot(*(b - c).T)
    lb = np.hypot(*(a - c).T)
    lc = np.hypot(*(a - b).T)

    def angle(opp, s1, s2):
        return np.arccos(np.clip((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0))

    return np.column_stack([angle(la, lb, lc), angle(lb, la, lc), angle(lc, la, lb)])


def min_angles(a, b, c):
    return angles_of(a, b, c).min(axis=1)


##
# Predicates.  Floating point first; exact rational arithmetic when the
# determinant is within PREDICATE_TOL of zero relative to its magnitude.

def orient2d(a, b, c):
    """Sign of twice the signed area of (a, b, c): +1 counter-clockwise."""
    detl = (a[0] - c[0]) * (b[1] - c[1])
    detr = (a[1] - c[1]) * (b[0] - c[0])
    det = detl - detr
    if abs(det) > PREDICATE_TOL * (abs(detl) + abs(detr)):
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


def incircle(a, b, c, d):
    """
    Positive when d lies strictly inside the circle through the
    counter-clockwise triangle (a, b, c), zero when cocircular.
    """
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    t1 = alift * (bdx * cdy - cdx * bdy)
    t2 = blift * (cdx * ady - adx * cdy)
    t3 = clift * (adx * bdy - bdx * ady)
    det = t1 + t2 + t3
    if abs(det) > PREDICATE_TOL * (abs(t1) + abs(t2) + abs(t3)):
        return 1 if det > 0 else -1
    return _incircle_exact(a, b, c, d)


def _incircle_exact(a, b, c, d):
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        px, py = Fraction(p[0]) - dx, Fraction(p[1]) - dy
        rows.append((px, py, px * px + py * py))
    (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
    det = (al * (bx * cy - cx * by)
           + bl * (cx * ay - ax * cy)
           + cl * (ax * by - bx * ay))
    return (det > 0) - (det < 0)
