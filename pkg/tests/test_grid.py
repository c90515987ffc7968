import numpy as np
import pytest
from types import SimpleNamespace

from netpscore.errors import ResourceError
from netpscore.grid import build_grid, grid_from_bounds


def test_corners():
    g = grid_from_bounds([(0, 1), (2, 3)], 2)
    np.testing.assert_array_equal(g.points, [[0, 2], [0, 3], [1, 2], [1, 3]])


def test_count_and_lexicographic():
    g = grid_from_bounds([(-1, 1)] * 4, 10)
    assert len(g) == 10_000
    order = np.lexsort(g.points.T[::-1])
    np.testing.assert_array_equal(order, np.arange(len(g)))


def test_cap():
    with pytest.raises(ResourceError):
        grid_from_bounds([(0, 1)] * 4, 10, cap=9_999)


def test_symmetric_about_means():
    fit = SimpleNamespace(response_mean=np.array([0.3, -1.0]), response_sd=np.array([1.0, 2.0]))
    g = build_grid(fit, per_dim=7, q_low=0.05, q_high=0.95)
    for k, m in enumerate(fit.response_mean):
        axis = np.unique(g.points[:, k])
        np.testing.assert_allclose(axis - m, -(axis - m)[::-1], atol=1e-14)
        assert g.bounds[k][1] == pytest.approx(m + 1.6448536269514722 * fit.response_sd[k])


def test_bad_quantiles():
    fit = SimpleNamespace(response_mean=np.zeros(2), response_sd=np.ones(2))
    with pytest.raises(ValueError):
        build_grid(fit, 4, 0.9, 0.1)
