#
# Uniform-grid fixed-radius neighbour search.  Points are bucketed into
# square cells no smaller than the query radius, so every neighbour of a
# query lies in the 3x3 block of cells around it.  Enumeration is exact.

import numpy as np

from palm_extremes.exceptions import PreconditionViolation

_OFFSETS = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
# cells per axis are capped at about 1e6 so cell keys fit comfortably in int64
_MAX_CELLS = 1e6


class UniformGrid(object):
    """
    Buckets an (N, 2) array of points.

    Attributes:
        points (ndarray): indexed points
        cell (float): cell side, at least the requested one
    """

    def __init__(self, points, cell):
        if not cell > 0:
            raise PreconditionViolation("grid cell must be positive, got %r" % (cell,))
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(self.points):
            span = float(np.ptp(self.points, axis=0).max())
            cell = max(float(cell), span / _MAX_CELLS)
        self.cell = cell
        if len(self.points) == 0:
            self._order = np.empty(0, dtype=np.int64)
            self._keys = np.empty(0, dtype=np.int64)
            return
        cells = np.floor(self.points / self.cell).astype(np.int64)
        self._low = cells.min(axis=0) - 1
        cells -= self._low
        self._rows = int(cells[:, 1].max()) + 2
        self._cols = int(cells[:, 0].max()) + 2
        keys = cells[:, 0] * self._rows + cells[:, 1]
        self._order = np.argsort(keys, kind='stable')
        self._keys = keys[self._order]

    def __len__(self):
        return self.points.shape[0]

    def _candidates(self, queries):
        cells = np.floor(queries / self.cell).astype(np.int64) - self._low
        qs, ps = [], []
        for dx, dy in _OFFSETS:
            cx, cy = cells[:, 0] + dx, cells[:, 1] + dy
            valid = (cx >= 0) & (cx < self._cols) & (cy >= 0) & (cy < self._rows)
            key = cx * self._rows + cy
            lo = np.searchsorted(self._keys, key, side='left')
            hi = np.searchsorted(self._keys, key, side='right')
            counts = np.where(valid, hi - lo, 0)
            total = int(counts.sum())
            if total == 0:
                continue
            first = np.cumsum(counts) - counts
            qi = np.repeat(np.arange(len(queries)), counts)
            pos = np.repeat(lo, counts) + np.arange(total) - np.repeat(first, counts)
            qs.append(qi)
            ps.append(self._order[pos])
        if not qs:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        return np.concatenate(qs), np.concatenate(ps)

    def pairs_within(self, queries, radius):
        """
        (query index, point index) pairs at Euclidean distance <= radius.
        A query that is itself an indexed point pairs with itself.
        """
        if radius < 0 or radius > self.cell:
            raise PreconditionViolation("radius %r outside [0, cell=%r]" % (radius, self.cell))
        queries = np.asarray(queries, dtype=float).reshape(-1, 2)
        if len(self) == 0 or len(queries) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        qi, pj = self._candidates(queries)
        diff = queries[qi] - self.points[pj]
        keep = np.hypot(diff[:, 0], diff[:, 1]) <= radius
        return qi[keep], pj[keep]

    def neighbour_counts(self, indices, radius):
        """Number of other indexed points within `radius` of each points[indices]."""
        indices = np.asarray(indices, dtype=np.int64).ravel()
        qi, pj = self.pairs_within(self.points[indices], radius)
        others = pj != indices[qi]
        return np.bincount(qi[others], minlength=len(indices))
