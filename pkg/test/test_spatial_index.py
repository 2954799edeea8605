import numpy as np
import pytest

from palm_extremes.exceptions import PreconditionViolation
from palm_extremes.spatial_index import UniformGrid


def brute_pairs(queries, points, radius):
    diff = queries[:, None, :] - points[None, :, :]
    qi, pj = np.nonzero(np.hypot(diff[..., 0], diff[..., 1]) <= radius)
    return set(zip(qi.tolist(), pj.tolist()))


@pytest.mark.parametrize('radius', [0.05, 0.3, 1.0])
def test_pairs_match_brute_force(rng, radius):
    points = rng.uniform(-3, 3, size=(500, 2))
    queries = rng.uniform(-4, 4, size=(200, 2))
    grid = UniformGrid(points, radius)
    qi, pj = grid.pairs_within(queries, radius)
    assert set(zip(qi.tolist(), pj.tolist())) == brute_pairs(queries, points, radius)


def test_neighbour_counts_exclude_self(rng):
    points = rng.uniform(0, 5, size=(300, 2))
    grid = UniformGrid(points, 0.5)
    counts = grid.neighbour_counts(np.arange(300), 0.5)
    expected = [len([p for (q, p) in brute_pairs(points[i:i + 1], points, 0.5) if p != i])
                for i in range(300)]
    assert counts.tolist() == expected


def test_boundary_distance_is_inclusive():
    grid = UniformGrid(np.array([[0.0, 0.0], [1.0, 0.0]]), 1.0)
    assert grid.neighbour_counts([0, 1], 1.0).tolist() == [1, 1]
    assert grid.neighbour_counts([0, 1], 0.999).tolist() == [0, 0]


def test_empty_grid_and_queries():
    grid = UniformGrid(np.empty((0, 2)), 1.0)
    qi, pj = grid.pairs_within(np.array([[0.0, 0.0]]), 1.0)
    assert qi.size == 0 and pj.size == 0
    grid = UniformGrid(np.array([[0.0, 0.0]]), 1.0)
    assert grid.pairs_within(np.empty((0, 2)), 1.0)[0].size == 0


def test_cell_is_enlarged_for_huge_spans():
    grid = UniformGrid(np.array([[0.0, 0.0], [1e9, 1e9]]), 1e-6)
    assert grid.cell >= 1e3
    assert grid.neighbour_counts([0, 1], 1e-6).tolist() == [0, 0]


def test_invalid_radius():
    grid = UniformGrid(np.zeros((1, 2)), 1.0)
    with pytest.raises(PreconditionViolation):
        grid.pairs_within(np.zeros((1, 2)), 2.0)
    with pytest.raises(PreconditionViolation):
        UniformGrid(np.zeros((1, 2)), 0.0)
