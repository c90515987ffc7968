"""Pairwise Influence Index and the per-year weighted country graph."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import (ConfigError, CoverageError, DomainError, IntegrityError, ParseError,
                     RangeError, SchemaError)

log = logging.getLogger(__name__)

PAIRWISE_COLUMNS = ("c", "c_prime", "year", "sp", "dist_std", "ling", "relig")


def geo_indicator(sp, dist_std):
    """Geographic proximity: half inverse hop count, half standardized closeness.

    >>> geo_indicator(2, 0.5)
    0.5
    """
    sp = np.asarray(sp, dtype=float)
    dist_std = np.asarray(dist_std, dtype=float)
    if np.any(sp < 1):
        raise DomainError("hop count sp must be >= 1 for distinct countries")
    if np.any((dist_std < 0) | (dist_std > 1)):
        raise DomainError("dist_std must lie in [0, 1]")
    out = 0.5 / sp + 0.5 * (1.0 - dist_std)
    return float(out) if out.ndim == 0 else out


def cultural_indicator(ling, relig):
    ling = np.asarray(ling, dtype=float)
    relig = np.asarray(relig, dtype=float)
    for name, arr in (("ling", ling), ("relig", relig)):
        if np.any((arr < 0) | (arr > 1)):
            raise DomainError(f"{name} must lie in [0, 1]")
    out = 0.5 * ling + 0.5 * relig
    return float(out) if out.ndim == 0 else out


def min_max_standardize(dist):
    dist = np.asarray(dist, dtype=float)
    lo, hi = dist.min(), dist.max()
    if hi == lo:
        return np.zeros_like(dist)
    return (dist - lo) / (hi - lo)


def validate_pairwise(df, standardize_dist=False):
    """Check a pairwise table and return a symmetric copy without self-pairs.

    Pairs given in only one direction are mirrored; pairs given in both
    directions with different values are averaged (with a warning).
    """
    missing = [c for c in PAIRWISE_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"pairwise table missing column(s): {', '.join(missing)}")
    df = df.loc[:, list(PAIRWISE_COLUMNS)].reset_index(drop=True).copy()
    df["c"] = df["c"].astype(str)
    df["c_prime"] = df["c_prime"].astype(str)
    for col in PAIRWISE_COLUMNS[2:]:
        vals = pd.to_numeric(df[col], errors="coerce")
        if vals.isna().any():
            row = int(np.flatnonzero(vals.isna().to_numpy())[0])
            raise ParseError(f"bad value in pairwise column {col!r} at row {row}", row=row)
        df[col] = vals.astype(float)
    df["year"] = df["year"].astype(np.int64)
    df = df[df["c"] != df["c_prime"]]
    if standardize_dist:
        df["dist_std"] = min_max_standardize(df["dist_std"].to_numpy())
    for col, lo, hi in (("dist_std", 0, 1), ("ling", 0, 1), ("relig", 0, 1), ("sp", 1, np.inf)):
        bad = (df[col] < lo) | (df[col] > hi)
        if bad.any():
            row = df.index[bad.to_numpy()][0]
            raise RangeError(f"pairwise {col} out of range at row {row}: {df.loc[row, col]}")
    if df.duplicated(["c", "c_prime", "year"]).any():
        raise IntegrityError("duplicate (c, c_prime, year) rows in pairwise table")

    lo = np.where(df["c"] < df["c_prime"], df["c"], df["c_prime"])
    hi = np.where(df["c"] < df["c_prime"], df["c_prime"], df["c"])
    keyed = df.assign(a=lo, b=hi)
    values = ["sp", "dist_std", "ling", "relig"]
    grouped = keyed.groupby(["a", "b", "year"])[values]
    spread = grouped.max().to_numpy() - grouped.min().to_numpy()
    if (spread > 1e-12).any():
        warnings.warn("asymmetric pairwise values averaged over both directions",
                      stacklevel=2)
    sym = keyed.groupby(["a", "b", "year"], as_index=False)[values].mean()
    fwd = sym.rename(columns={"a": "c", "b": "c_prime"})
    rev = sym.rename(columns={"a": "c_prime", "b": "c"})
    out = pd.concat([fwd, rev], ignore_index=True)[list(PAIRWISE_COLUMNS)]
    return out.sort_values(["year", "c", "c_prime"]).reset_index(drop=True)


def load_pairwise(path, standardize_dist=False, delimiter=","):
    df = pd.read_csv(path, sep=delimiter, encoding="utf-8", dtype={"c": str, "c_prime": str})
    return validate_pairwise(df, standardize_dist=standardize_dist)


def check_iiw(alpha, beta):
    if alpha < 0 or beta < 0:
        raise ConfigError(f"influence weights must be non-negative, got ({alpha}, {beta})")
    total = alpha + beta
    if not (abs(total) < 1e-12 or abs(total - 1) < 1e-12):
        raise ConfigError(f"alpha + beta must be 0 or 1, got {total}")


@dataclass(frozen=True, eq=False)
class InfluenceGraph:
    """Per-year symmetric weight matrices over a fixed country ordering.

    ``present[t]`` flags the countries observed in year ``t``; rows and
    columns of absent countries are zero. Links across years are zero by
    construction and never stored.
    """

    countries: tuple
    years: tuple
    weights: dict
    present: dict
    alpha: float
    beta: float

    def slice(self, t):
        try:
            return self.weights[int(t)]
        except KeyError:
            raise KeyError(f"year {t} not in influence graph") from None

    @property
    def is_zero(self):
        return all(not w.any() for w in self.weights.values())

    def country_index(self, labels):
        pos = {c: k for k, c in enumerate(self.countries)}
        return np.array([pos[c] for c in labels], dtype=np.int64)

    def weight(self, c, c_prime, t):
        i, j = self.country_index([c, c_prime])
        return float(self.slice(t)[i, j])

    def scaled(self, factor):
        return InfluenceGraph(self.countries, self.years,
                              {t: w * factor for t, w in self.weights.items()},
                              self.present, self.alpha, self.beta)

    def to_long(self):
        rows = []
        for t in self.years:
            w = self.weights[t]
            idx = np.flatnonzero(self.present[t])
            for i in idx:
                for j in idx:
                    if i != j:
                        rows.append((self.countries[i], self.countries[j], t, w[i, j]))
        return pd.DataFrame(rows, columns=["c", "c_prime", "year", "weight"])


def build_influence(raw, alpha, beta, units=None):
    """Influence graph ``I = alpha * IG + beta * IC`` for every pair-year.

    Parameters
    ----------
    raw : DataFrame or None
        Validated pairwise table (see :func:`validate_pairwise`). May be None
        only for the no-interference weights ``(0, 0)``.
    alpha, beta : float
        Influence input weights; both non-negative with sum 0 or 1.
    units : iterable of (country, year), optional
        Panel units the graph must cover. Every pair of distinct countries
        observed in the same year needs a pairwise row. Defaults to all
        country-years present in ``raw``.
    """
    check_iiw(alpha, beta)
    if units is None:
        if raw is None:
            raise ConfigError("need pairwise data or units to build a graph")
        units = set(zip(raw["c"], raw["year"])) | set(zip(raw["c_prime"], raw["year"]))
    units = {(str(c), int(t)) for c, t in units}
    countries = tuple(sorted({c for c, _ in units}))
    years = tuple(sorted({t for _, t in units}))
    pos = {c: k for k, c in enumerate(countries)}
    nc = len(countries)
    present = {t: np.zeros(nc, dtype=bool) for t in years}
    for c, t in units:
        present[t][pos[c]] = True
    weights = {t: np.zeros((nc, nc)) for t in years}
    zero = alpha == 0 and beta == 0
    if raw is None:
        if not zero:
            raise ConfigError("pairwise data required unless alpha = beta = 0")
        return InfluenceGraph(countries, years, weights, present, float(alpha), float(beta))

    sub = raw[raw["year"].isin(years) & raw["c"].isin(pos) & raw["c_prime"].isin(pos)]
    ci = sub["c"].map(pos).to_numpy()
    cj = sub["c_prime"].map(pos).to_numpy()
    yr = sub["year"].to_numpy()
    keep = np.array([present[t][i] and present[t][j] for t, i, j in zip(yr, ci, cj)],
                    dtype=bool)
    ci, cj, yr = ci[keep], cj[keep], yr[keep]
    ig = geo_indicator(sub["sp"].to_numpy()[keep], sub["dist_std"].to_numpy()[keep])
    ic = cultural_indicator(sub["ling"].to_numpy()[keep], sub["relig"].to_numpy()[keep])
    val = alpha * np.asarray(ig) + beta * np.asarray(ic)
    covered = {t: np.zeros((nc, nc), dtype=bool) for t in years}
    for t in years:
        m = yr == t
        weights[t][ci[m], cj[m]] = val[m]
        covered[t][ci[m], cj[m]] = True

    missing = []
    for t in years:
        idx = np.flatnonzero(present[t])
        block = covered[t][np.ix_(idx, idx)]
        np.fill_diagonal(block, True)
        for a, b in zip(*np.nonzero(~block)):
            if a < b:
                missing.append((countries[idx[a]], countries[idx[b]], t))
    if missing:
        shown = ", ".join(f"({a}, {b}, {t})" for a, b, t in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise CoverageError(f"pairwise data missing for {shown}{more}", missing)
    for t in years:
        np.fill_diagonal(weights[t], 0.0)
    log.debug("built influence graph alpha=%s beta=%s over %d years", alpha, beta, len(years))
    return InfluenceGraph(countries, years, weights, present, float(alpha), float(beta))


def vertex_centrality(graph, t):
    """Strength centrality (weighted degree) of every country in year ``t``."""
    return graph.slice(t).sum(axis=1)


def unit_centrality(graph, country, time):
    """Strength centrality of each panel unit, aligned with the given rows."""
    ci = graph.country_index(country)
    out = np.empty(len(ci))
    for t in np.unique(time):
        m = np.asarray(time) == t
        out[m] = vertex_centrality(graph, t)[ci[m]]
    return out
