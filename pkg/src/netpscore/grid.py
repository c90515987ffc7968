"""Cartesian evaluation grid over the transformed exposure space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ResourceError

DEFAULT_CAP = 10**6


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray  # (per_dim ** K, K), lexicographic
    per_dim: int
    bounds: tuple  # per-dimension (low, high)

    def __len__(self):
        return len(self.points)


def grid_from_bounds(bounds, per_dim, cap=DEFAULT_CAP):
    K = len(bounds)
    if per_dim < 2:
        raise ValueError("per_dim must be at least 2")
    if per_dim**K > cap:
        raise ResourceError(f"grid of {per_dim}^{K} = {per_dim**K} points exceeds cap {cap}")
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    return Grid(points, per_dim, tuple((float(lo), float(hi)) for lo, hi in bounds))


def build_grid(fit, per_dim=10, q_low=0.05, q_high=0.95, cap=DEFAULT_CAP):
    """Equally spaced points between the ``q_low`` and ``q_high`` quantiles of
    each transformed exposure's marginal (normal with the sample mean and
    standard deviation of the fitted response)."""
    if not 0 < q_low < q_high < 1:
        raise ValueError("need 0 < q_low < q_high < 1")
    lo = fit.response_mean + fit.response_sd * ndtri(q_low)
    hi = fit.response_mean + fit.response_sd * ndtri(q_high)
    return grid_from_bounds(list(zip(lo, hi)), per_dim, cap)
