"""Ordered-quantile normalization.

Each value is replaced by the standard-normal quantile of its rank,
``ndtri(rank / (n + 1))``. Ties share the mean of their rank range.
Out-of-sample values get a linearly interpolated rank, clamped to the
training range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .errors import DegenerateColumnError


@dataclass(frozen=True, eq=False)
class OrqMap:
    sorted_original: np.ndarray
    n: int
    knots: np.ndarray  # distinct training values, ascending
    knot_ranks: np.ndarray  # mid-rank of each distinct value

    def apply(self, x):
        return orq_apply(self, x)

    def inverse(self, g_star):
        return orq_inverse(self, g_star)


def orq_fit_transform(column):
    x = np.asarray(column, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("ORQ needs a 1-d column with at least two values")
    if not np.all(np.isfinite(x)):
        raise ValueError("ORQ column contains non-finite values")
    if np.all(x == x[0]):
        raise DegenerateColumnError("constant column: all ranks tied")
    n = x.size
    ranks = rankdata(x, method="average")
    s = np.sort(x)
    knots, first, counts = np.unique(s, return_index=True, return_counts=True)
    knot_ranks = first + (counts + 1) / 2.0
    fitted = OrqMap(s, n, knots, knot_ranks)
    return fitted, ndtri(ranks / (n + 1))


def _rank_of(m, x):
    return np.interp(x, m.knots, m.knot_ranks)


def orq_apply(m, x):
    out = ndtri(_rank_of(m, np.asarray(x, dtype=float)) / (m.n + 1))
    return float(out) if np.ndim(out) == 0 else out


def orq_inverse(m, g_star):
    g = np.asarray(g_star, dtype=float)
    r = ndtr(g) * (m.n + 1)
    # snap onto training ranks so fitted values round-trip exactly
    k = np.clip(np.searchsorted(m.knot_ranks, r), 0, len(m.knot_ranks) - 1)
    out = np.interp(r, m.knot_ranks, m.knots)
    for cand in (k - 1, k):
        cand = np.clip(cand, 0, len(m.knot_ranks) - 1)
        hit = np.abs(m.knot_ranks[cand] - r) <= 1e-9 * (m.n + 1)
        out = np.where(hit, m.knots[cand], out)
    return float(out) if out.ndim == 0 else out


def orq_columns(G):
    """Transform every column of ``G``; returns the fitted maps and ``G*``."""
    G = np.asarray(G, dtype=float)
    maps, cols = [], []
    for k in range(G.shape[1]):
        try:
            m, col = orq_fit_transform(G[:, k])
        except DegenerateColumnError as exc:
            raise DegenerateColumnError(f"exposure column {k}: {exc}") from None
        maps.append(m)
        cols.append(col)
    return maps, np.column_stack(cols)
