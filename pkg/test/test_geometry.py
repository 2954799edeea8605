import math

import numpy as np
import pytest

from palm_extremes.exceptions import DegenerateTriangle, PreconditionViolation
from palm_extremes.geometry import (Point, Triangle, Window, circumcircle, circumcircles,
                                    d0, d0_matrix, incircle, min_angles, orient2d,
                                    triangle_angles)


def test_circumcircle_right_isoceles():
    center, radius = circumcircle((0, 0), (2, 0), (0, 2))
    assert center.x == pytest.approx(1.0)
    assert center.y == pytest.approx(1.0)
    assert radius == pytest.approx(math.sqrt(2.0))


def test_circumcircle_equilateral():
    center, radius = circumcircle((0, 0), (1, 0), (0.5, math.sqrt(3) / 2))
    assert center.x == pytest.approx(0.5)
    assert center.y == pytest.approx(math.sqrt(3) / 6)
    assert radius == pytest.approx(1 / math.sqrt(3))


@pytest.mark.parametrize('pts', [
    ((0, 0), (1, 0), (2, 0)),
    ((0, 0), (0, 0), (1, 1)),
    ((1e6, 1e6), (1e6 + 1, 1e6 + 1), (1e6 + 2, 1e6 + 2)),
])
def test_circumcircle_degenerate(pts):
    with pytest.raises(DegenerateTriangle):
        circumcircle(*pts)


def test_circumcircle_equidistant_on_random_triples(rng):
    pts = rng.uniform(-10, 10, size=(1000, 3, 2))
    for a, b, c in pts:
        center, radius = circumcircle(a, b, c)
        for v in (a, b, c):
            dist = math.hypot(v[0] - center.x, v[1] - center.y)
            assert abs(dist - radius) <= 1e-9 * radius


def test_triangle_angles_known_cases():
    eq = triangle_angles((0, 0), (1, 0), (0.5, math.sqrt(3) / 2))
    assert eq == pytest.approx((math.pi / 3,) * 3)
    right = triangle_angles((0, 0), (1, 0), (0, 1))
    assert right == pytest.approx((math.pi / 2, math.pi / 4, math.pi / 4))


def test_triangle_angles_thin_triangle():
    angles = triangle_angles((0, 0), (1, 0), (0.5, 0.01))
    assert sum(angles) == pytest.approx(math.pi, abs=1e-9)
    assert min(angles) == pytest.approx(math.atan(0.02), rel=1e-9)


def test_triangle_angles_rigid_motion_invariance(rng):
    for _ in range(200):
        tri = rng.uniform(-1, 1, size=(3, 2))
        phi = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        moved = tri @ rot.T + rng.uniform(-5, 5, size=2)
        before = triangle_angles(*tri)
        after = triangle_angles(*moved)
        assert np.allclose(before, after, atol=1e-9, rtol=0)


def test_triangle_from_vertices():
    t = Triangle.from_vertices((0, 0), (2, 0), (0, 2))
    assert t.circumcenter == Point(1.0, 1.0)
    assert t.min_angle == pytest.approx(math.pi / 4)
    assert t.vertices[1] == Point(2.0, 0.0)


def test_d0_values():
    assert d0((0, 0), (0, 0)) == 0.0
    assert d0((0, 0), (0.3, 0.4)) == pytest.approx(0.5)
    assert d0((0, 0), (5, 0)) == 1.0


def test_d0_triangle_inequality(rng):
    pts = rng.uniform(-1, 1, size=(1000, 3, 2))
    for x, y, z in pts:
        assert d0(x, z) <= d0(x, y) + d0(y, z)
        assert d0(x, y) == d0(y, x)


def test_d0_matrix_matches_scalar(rng):
    xs = rng.uniform(-2, 2, size=(5, 2))
    ys = rng.uniform(-2, 2, size=(4, 2))
    m = d0_matrix(xs, ys)
    assert m.shape == (5, 4)
    for i in range(5):
        for j in range(4):
            assert m[i, j] == pytest.approx(d0(xs[i], ys[j]))


def test_point_rejects_non_finite():
    with pytest.raises(PreconditionViolation):
        Point(float('nan'), 0.0)
    with pytest.raises(PreconditionViolation):
        Point(0.0, float('inf'))


def test_window_from_scale():
    w = Window.from_scale(400)
    assert w.half_side == 10.0
    assert w.area == 400.0
    assert w.contains(Point(10.0, -10.0))
    assert not w.contains(Point(10.5, 0.0))
    assert list(w.contains([[0, 0], [11, 0]])) == [True, False]


def test_window_area_exact():
    for n in (3.0, 17.0, 1e4, 12345.678):
        assert Window.from_scale(n).area == n


@pytest.mark.parametrize('half_side', [0.0, -1.0, float('inf')])
def test_window_rejects_bad_half_side(half_side):
    with pytest.raises(PreconditionViolation):
        Window(half_side)


def test_window_dilate_and_disks():
    w = Window(1.0)
    assert w.dilate(0) is w
    big = w.dilate(2.0)
    assert big.half_side == 3.0
    assert big.contains_window(w)
    assert not w.contains_window(big)
    inside = big.contains_disks([[0, 0], [2, 0]], [2.9, 1.5])
    assert list(inside) == [True, False]
    with pytest.raises(PreconditionViolation):
        w.dilate(-1)


def test_vectorised_forms_agree_with_scalar(rng):
    a, b, c = (rng.uniform(-1, 1, size=(50, 2)) for _ in range(3))
    centers, radii = circumcircles(a, b, c)
    angles = min_angles(a, b, c)
    for t in range(50):
        center, radius = circumcircle(a[t], b[t], c[t])
        assert centers[t] == pytest.approx([center.x, center.y], rel=1e-9, abs=1e-9)
        assert radii[t] == pytest.approx(radius, rel=1e-9)
        assert angles[t] == pytest.approx(min(triangle_angles(a[t], b[t], c[t])), abs=1e-10)


def test_orient2d_signs():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0
    assert orient2d((0.5, 0.5), (12, 12), (24, 24)) == 0


def test_incircle_signs():
    a, b, c = (0, 0), (1, 0), (0, 1)
    assert incircle(a, b, c, (0.5, 0.5)) == 1
    assert incircle(a, b, c, (2, 2)) == -1
    assert incircle(a, b, c, (1, 1)) == 0
