import math

import numpy as np
import pytest
from scipy import stats

from palm_extremes.delaunay import (BACKENDS, Triangulation, interior_mask, interior_triangles,
                                    triangulate, verify_empty_circumdisk)
from palm_extremes.exceptions import DegenerateConfiguration, TooFewPoints
from palm_extremes.geometry import Window
from palm_extremes.sampling import CountingMeasure, Seed, sample_poisson, typical_min_angles


def random_points(seed, count):
    return Seed(seed).rng().uniform(0.0, 1.0, size=(count, 2))


def check_structure(tri):
    # every stored neighbour relation is mutual and shares exactly two vertices
    for t in range(len(tri)):
        for i in range(3):
            nb = tri.neighbors[t, i]
            if nb < 0:
                continue
            assert t in tri.neighbors[nb]
            shared = set(tri.simplices[t]) & set(tri.simplices[nb])
            assert len(shared) == 2
            assert tri.simplices[t, i] not in shared
    a, b, c = (tri.points[tri.simplices[:, k]] for k in range(3))
    area2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    assert np.all(area2 > 0)


def test_three_points():
    tri = triangulate([(0, 0), (1, 0), (0, 1)])
    assert len(tri) == 1
    assert tri.hull_size == 3
    assert verify_empty_circumdisk(tri, [(0, 0), (1, 0), (0, 1)])
    assert list(tri.neighbors[0]) == [-1, -1, -1]


def test_unit_square_is_cocircular():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    tri = triangulate(pts)
    assert len(tri) == 2
    assert len(tri.edges()) == 5
    assert verify_empty_circumdisk(tri, pts)
    check_structure(tri)


def test_oracle_rejects_non_delaunay():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    forced = Triangulation.build(pts, [[0, 1, 2]])
    assert forced.circumcenters[0] == pytest.approx([0.5, 0.5])
    assert forced.circumradii[0] == pytest.approx(math.sqrt(2) / 2)
    assert not verify_empty_circumdisk(forced, pts)


@pytest.mark.parametrize('points, error', [
    ([(0, 0), (1, 1)], TooFewPoints),
    ([], TooFewPoints),
    ([(0, 0), (1, 1), (2, 2), (3, 3)], DegenerateConfiguration),
    ([(0, 0), (1, 0), (1, 0), (0, 1)], DegenerateConfiguration),
])
def test_invalid_inputs(points, error):
    with pytest.raises(error):
        triangulate(points)


def test_unknown_method():
    with pytest.raises(ValueError):
        triangulate([(0, 0), (1, 0), (0, 1)], method='flip')


@pytest.mark.parametrize('method', BACKENDS)
@pytest.mark.parametrize('count', [10, 100])
def test_random_inputs_pass_oracle(method, count):
    for s in range(50):
        pts = random_points(s, count)
        tri = triangulate(pts, method=method)
        assert verify_empty_circumdisk(tri, pts)
        assert len(tri) == 2 * count - tri.hull_size - 2


@pytest.mark.parametrize('method', BACKENDS)
def test_large_input_passes_oracle(method):
    for s in range(5):
        pts = random_points(1000 + s, 2000)
        tri = triangulate(pts, method=method)
        assert verify_empty_circumdisk(tri, pts)
        assert len(tri) == 2 * 2000 - tri.hull_size - 2
        check_structure(tri)


@pytest.mark.slow
def test_large_input_many_seeds():
    for s in range(50):
        pts = random_points(2000 + s, 2000)
        tri = triangulate(pts)
        assert verify_empty_circumdisk(tri, pts)
        assert len(tri) == 2 * 2000 - tri.hull_size - 2


@pytest.mark.slow
def test_interior_angles_follow_typical_triangle():
    window = Window.from_scale(1e4)
    points = sample_poisson(1.0, window.dilate(3.0), Seed(17))
    tri = triangulate(points, method='qhull')
    interior = np.array([t.min_angle for t in interior_triangles(tri, window, 3.0)])
    assert len(interior) > 15000
    typical = typical_min_angles(len(interior), Seed(18))
    assert stats.ks_2samp(interior, typical).pvalue > 0.01


def test_backends_agree():
    pts = random_points(7, 300)
    ours = triangulate(pts, method='bowyer-watson')
    qhull = triangulate(pts, method='qhull')
    assert ours.vertex_sets() == qhull.vertex_sets()
    check_structure(qhull)


def test_insertion_order_invariance():
    pts = random_points(11, 200)
    perm = Seed(3).rng().permutation(200)
    tri = triangulate(pts)
    shuffled = triangulate(pts[perm])
    relabelled = set(frozenset(int(perm[v]) for v in s) for s in shuffled.vertex_sets())
    assert relabelled == tri.vertex_sets()


def test_grid_with_cocircular_quads():
    xs, ys = np.meshgrid(np.arange(6.0), np.arange(5.0))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    tri = triangulate(pts)
    assert len(tri) == 2 * 5 * 4
    assert verify_empty_circumdisk(tri, pts)
    check_structure(tri)


def test_triangle_records():
    tri = triangulate(random_points(5, 30))
    t = tri.triangle(0)
    assert t.circumradius == pytest.approx(float(tri.circumradii[0]))
    assert 0 < t.min_angle <= math.pi / 3
    assert len(tri.triangles) == len(tri)
    assert not tri.simplices.flags.writeable


def test_accepts_counting_measure():
    cm = CountingMeasure(random_points(9, 20))
    assert verify_empty_circumdisk(triangulate(cm), cm)


def test_interior_triangles_guard_zero():
    window = Window(0.5)
    pts = random_points(4, 200) - 0.5
    tri = triangulate(pts)
    kept = interior_triangles(tri, window, 0.0)
    assert len(kept) == int(np.count_nonzero(window.contains(tri.circumcenters)))


def test_interior_triangles_guard_filter():
    window = Window(1.0)
    region = window.dilate(1.0)
    pts = Seed(21).rng().uniform(-2.0, 2.0, size=(400, 2))
    tri = triangulate(pts)
    mask = interior_mask(tri, window, 1.0)
    for t in np.flatnonzero(mask):
        center, radius = tri.circumcenters[t], tri.circumradii[t]
        assert np.all(np.abs(center) <= 1.0)
        assert np.all(np.abs(center) + radius <= region.half_side)
    # a retained triangle stays Delaunay when points are added outside the dilated window
    extra = np.array([[2.5, 0.0], [0.0, -2.5], [-2.6, 2.6], [3.0, 3.0]])
    bigger = triangulate(np.vstack([pts, extra]))
    assert set(frozenset(int(v) for v in tri.simplices[t]) for t in np.flatnonzero(mask)) \
        <= bigger.vertex_sets()
