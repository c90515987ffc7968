"""Neighborhood treatment exposure matrix (NTEM)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import IntegrityError


@dataclass(frozen=True, eq=False)
class ExposureMatrix:
    G: np.ndarray
    level_order: tuple

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim != 2 or G.shape[1] != len(self.level_order):
            raise IntegrityError("exposure matrix must be N x K")
        object.__setattr__(self, "G", G)

    @property
    def is_zero(self):
        return not self.G.any()

    def to_frame(self, country, time):
        df = pd.DataFrame({"country": country, "year": time})
        for k, level in enumerate(self.level_order):
            df[f"G_{level}"] = self.G[:, k]
        return df


def build_ntem(graph, z, panel):
    """Weighted exposure of every unit to each treatment level among its
    same-year neighbors: ``G[i, k] = sum_j I[i, j] * (Z_j == k)``.

    Only units present in ``panel`` count as neighbors; exposure is not
    normalized by the number of neighbors.
    """
    if len(z.codes) != panel.n:
        raise IntegrityError(
            f"treatment vector has {len(z.codes)} entries for {panel.n} panel rows")
    K = z.K
    G = np.zeros((panel.n, K))
    try:
        ci = graph.country_index(panel.country)
    except KeyError as exc:
        raise IntegrityError(f"country {exc} missing from influence graph") from None
    onehot = np.eye(K)[z.codes]
    for t in np.unique(panel.time):
        rows = np.flatnonzero(panel.time == t)
        W = graph.slice(t)[np.ix_(ci[rows], ci[rows])]
        G[rows] = W @ onehot[rows]
    return ExposureMatrix(G, tuple(z.levels))


def row_sums_by_level(ntem):
    """Total exposure to each level (column sums of the NTEM)."""
    return np.asarray(ntem.G if isinstance(ntem, ExposureMatrix) else ntem).sum(axis=0)
