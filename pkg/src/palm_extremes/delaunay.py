#
# Planar Delaunay triangulation by incremental Bowyer-Watson insertion, an
# O(T * N) empty-circumdisk oracle, and the guard-zone filter that keeps only
# triangles unaffected by unobserved points.
#
# Instead of a finite super-triangle the triangulation carries one symbolic
# vertex at infinity: every hull edge (a, b) has a "ghost" triangle
# (a, b, GHOST) whose circumdisk is the open half-plane beyond the edge.  This
# is the limit of an arbitrarily large super-triangle and keeps hull
# triangles exact.

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay as QhullDelaunay
from scipy.spatial import QhullError

from palm_extremes.exceptions import DegenerateConfiguration, TooFewPoints
from palm_extremes.geometry import (Point, Triangle, circumcircles, incircle, min_angles,
                                    orient2d)

logger = logging.getLogger(__name__)

GHOST = -1
STRICT_TOL = 1e-9
BACKENDS = ('bowyer-watson', 'qhull')


@dataclass(frozen=True)
class Triangulation(object):
    """
    Counter-clockwise triangles over `points`.  neighbors[t, i] is the
    triangle across the edge opposite vertex i, or -1 on the hull.
    """
    points: np.ndarray
    simplices: np.ndarray
    neighbors: np.ndarray
    circumcenters: np.ndarray
    circumradii: np.ndarray
    min_angles: np.ndarray

    @classmethod
    def build(cls, points, simplices, neighbors=None):
        points = np.array(points, dtype=float).reshape(-1, 2)
        simplices = np.array(simplices, dtype=int).reshape(-1, 3)
        if neighbors is None:
            neighbors = _neighbors_from_simplices(simplices)
        neighbors = np.array(neighbors, dtype=int).reshape(-1, 3)
        a, b, c = (points[simplices[:, k]] for k in range(3))
        centers, radii = circumcircles(a, b, c)
        for arr in (points, simplices, neighbors, centers, radii):
            arr.setflags(write=False)
        angles = min_angles(a, b, c)
        angles.setflags(write=False)
        return cls(points, simplices, neighbors, centers, radii, angles)

    def __len__(self):
        return self.simplices.shape[0]

    @property
    def hull_size(self):
        """Number of hull edges (equals hull vertices in general position)."""
        return int(np.count_nonzero(self.neighbors == -1))

    def triangle(self, t):
        a, b, c = (Point(*map(float, self.points[k])) for k in self.simplices[t])
        return Triangle(a, b, c, Point(*map(float, self.circumcenters[t])),
                        float(self.circumradii[t]), float(self.min_angles[t]))

    @property
    def triangles(self):
        return [self.triangle(t) for t in range(len(self))]

    def edges(self):
        """Sorted unique vertex pairs."""
        s = self.simplices
        pairs = np.vstack([s[:, [0, 1]], s[:, [1, 2]], s[:, [2, 0]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    def vertex_sets(self):
        return set(frozenset(int(v) for v in tri) for tri in self.simplices)


def _neighbors_from_simplices(simplices):
    owner = {}
    for t, tri in enumerate(simplices):
        for i in range(3):
            edge = frozenset((int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])))
            owner.setdefault(edge, []).append((t, i))
    neighbors = -np.ones(simplices.shape, dtype=int)
    for sides in owner.values():
        if len(sides) == 2:
            (t0, i0), (t1, i1) = sides
            neighbors[t0, i0] = t1
            neighbors[t1, i1] = t0
    return neighbors


def _insertion_order(pts):
    """Snake order over horizontal bands; a function of the coordinates only."""
    n = len(pts)
    bands = max(1, int(np.sqrt(n / 2.0)))
    ymin, ymax = pts[:, 1].min(), pts[:, 1].max()
    span = (ymax - ymin) or 1.0
    band = np.minimum((bands * (pts[:, 1] - ymin) / span).astype(int), bands - 1)
    xkey = np.where(band % 2 == 0, pts[:, 0], -pts[:, 0])
    return np.lexsort((pts[:, 1], xkey, band))


class _BowyerWatson(object):
    """Mutable triangulation state used while inserting points."""

    def __init__(self, pts):
        self.p = [(float(x), float(y)) for x, y in pts]
        self.verts = []
        self.nbrs = []
        self.alive = []
        self.last = 0
        self.steps = 0

    def _new(self, verts, nbrs):
        self.verts.append(verts)
        self.nbrs.append(nbrs)
        self.alive.append(True)
        return len(self.verts) - 1

    def start(self, a, b, c):
        p = self.p
        if orient2d(p[a], p[b], p[c]) < 0:
            b, c = c, b
        t = self._new([a, b, c], [1, 2, 3])
        # ghosts across edges (b, c), (c, a), (a, b)
        g0 = self._new([c, b, GHOST], [-1, -1, t])
        g1 = self._new([a, c, GHOST], [-1, -1, t])
        g2 = self._new([b, a, GHOST], [-1, -1, t])
        # ghost (u, w, G): opposite u is edge (w, G), opposite w is edge (G, u)
        self.nbrs[g0][0], self.nbrs[g0][1] = g2, g1
        self.nbrs[g1][0], self.nbrs[g1][1] = g0, g2
        self.nbrs[g2][0], self.nbrs[g2][1] = g1, g0
        self.last = t

    def in_disk(self, t, q):
        a, b, c = self.verts[t]
        p = self.p
        if c != GHOST:
            return incircle(p[a], p[b], p[c], q) > 0
        side = orient2d(p[a], p[b], q)
        if side != 0:
            return side > 0
        # collinear with the hull edge: inside iff strictly between a and b
        (ax, ay), (bx, by) = p[a], p[b]
        dot_a = (q[0] - ax) * (bx - ax) + (q[1] - ay) * (by - ay)
        dot_b = (q[0] - bx) * (ax - bx) + (q[1] - by) * (ay - by)
        return dot_a > 0 and dot_b > 0

    def locate(self, q):
        """A triangle whose circumdisk contains q, by a visibility walk."""
        p = self.p
        t = self.last
        limit = 4 * len(self.verts) + 16
        for _ in range(limit):
            self.steps += 1
            verts = self.verts[t]
            if verts[2] == GHOST:
                if self.in_disk(t, q):
                    return t
                t = self.nbrs[t][2]
                continue
            for i in range(3):
                u, w = verts[(i + 1) % 3], verts[(i + 2) % 3]
                if orient2d(p[u], p[w], q) < 0:
                    t = self.nbrs[t][i]
                    break
            else:
                return t
        logger.debug("visibility walk did not terminate; scanning")
        for t, alive in enumerate(self.alive):
            if alive and self.in_disk(t, q):
                return t
        raise DegenerateConfiguration("no triangle contains point %r" % (q,))

    def insert(self, k):
        q = self.p[k]
        first = self.locate(q)
        bad = {first}
        stack = [first]
        while stack:
            t = stack.pop()
            for n in self.nbrs[t]:
                if n not in bad and self.in_disk(n, q):
                    bad.add(n)
                    stack.append(n)

        boundary = []
        for t in bad:
            verts, nbrs = self.verts[t], self.nbrs[t]
            for i in range(3):
                if nbrs[i] not in bad:
                    boundary.append((verts[(i + 1) % 3], verts[(i + 2) % 3], nbrs[i], t))

        created = []
        by_u, by_w = {}, {}
        for u, w, outer, old in boundary:
            t = self._new([k, u, w], [outer, -1, -1])
            created.append(t)
            by_u[u] = t
            by_w[w] = t
            onbrs = self.nbrs[outer]
            onbrs[onbrs.index(old)] = t
        for t in created:
            _, u, w = self.verts[t]
            self.nbrs[t][1] = by_u[w]
            self.nbrs[t][2] = by_w[u]
        for t in created:
            verts, nbrs = self.verts[t], self.nbrs[t]
            if verts[1] == GHOST:
                self.verts[t] = [verts[2], verts[0], verts[1]]
                self.nbrs[t] = [nbrs[2], nbrs[0], nbrs[1]]
            elif verts[2] != GHOST:
                self.last = t
        for t in bad:
            self.alive[t] = False

    def result(self):
        keep = [t for t, alive in enumerate(self.alive) if alive and self.verts[t][2] != GHOST]
        index = dict((t, i) for i, t in enumerate(keep))
        simplices = np.array([self.verts[t] for t in keep], dtype=int).reshape(-1, 3)
        neighbors = np.array([[index.get(n, -1) for n in self.nbrs[t]] for t in keep],
                             dtype=int).reshape(-1, 3)
        return simplices, neighbors


def _bowyer_watson(pts):
    order = _insertion_order(pts)
    state = _BowyerWatson(pts)
    p = state.p
    first = int(order[0])
    second = None
    third = None
    for k in order[1:]:
        k = int(k)
        if second is None:
            if p[k] != p[first]:
                second = k
        elif orient2d(p[first], p[second], p[k]) != 0:
            third = k
            break
    if third is None:
        raise DegenerateConfiguration("all %d points are collinear" % len(pts))
    state.start(first, second, third)
    for k in order:
        k = int(k)
        if k not in (first, second, third):
            state.insert(k)
    logger.debug("bowyer-watson: %d points, %d walk steps", len(pts), state.steps)
    return state.result()


def _qhull(pts):
    try:
        dt = QhullDelaunay(pts)
    except QhullError as e:
        raise DegenerateConfiguration("qhull failed: %s" % (e,))
    simplices = dt.simplices.copy()
    neighbors = dt.neighbors.copy()
    a, b, c = (pts[simplices[:, k]] for k in range(3))
    cw = ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
          - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])) < 0
    simplices[cw] = simplices[cw][:, [0, 2, 1]]
    neighbors[cw] = neighbors[cw][:, [0, 2, 1]]
    return simplices, neighbors


def triangulate(points, method='bowyer-watson'):
    """Delaunay triangulation of a pattern in general position."""
    pts = np.asarray(getattr(points, 'points', points), dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise TooFewPoints("need at least 3 points, got %d" % len(pts))
    if len(np.unique(pts, axis=0)) != len(pts):
        raise DegenerateConfiguration("duplicate points cannot be triangulated")
    if method == 'bowyer-watson':
        simplices, neighbors = _bowyer_watson(pts)
    elif method == 'qhull':
        simplices, neighbors = _qhull(pts)
    else:
        raise ValueError("unknown triangulation method %r, expected one of %s"
                         % (method, ', '.join(BACKENDS)))
    return Triangulation.build(pts, simplices, neighbors)


def verify_empty_circumdisk(tri, points, chunk=256):
    """True iff no point lies strictly inside any circumdisk."""
    pts = np.asarray(getattr(points, 'points', points), dtype=float).reshape(-1, 2)
    centers, radii = tri.circumcenters, tri.circumradii
    for start in range(0, len(tri), chunk):
        c = centers[start:start + chunk]
        r = radii[start:start + chunk]
        diff = pts[None, :, :] - c[:, None, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        if np.any(dist < (r * (1.0 - STRICT_TOL))[:, None]):
            return False
    return True


def interior_mask(tri, window, guard):
    inside = window.contains(tri.circumcenters)
    if guard == 0:
        # no guard zone, no correction
        return inside
    region = window.dilate(guard)
    return inside & region.contains_disks(tri.circumcenters, tri.circumradii)


def interior_triangles(tri, window, guard):
    """
    Triangles with circumcenter in `window` whose circumdisk stays inside
    the window dilated by `guard`; these are Delaunay triangles of every
    extension of the sample beyond the dilated window.  guard = 0 keeps
    every triangle with circumcenter in `window`.
    """
    return [tri.triangle(t) for t in np.flatnonzero(interior_mask(tri, window, guard))]
