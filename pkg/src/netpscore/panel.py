"""Unit-by-year panel data: ingestion, lag alignment and treatment categories."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd

from .errors import (ConfigError, EmptyResultError, IntegrityError, ParseError,
                     RangeError, SchemaError)


class Scheme(str, enum.Enum):
    FOUR = "FOUR"
    THREE = "THREE"
    BINARY = "BINARY"


LEVELS = {
    Scheme.FOUR: ("LL", "HL", "LH", "HH"),
    Scheme.THREE: ("L", "M", "H"),
    Scheme.BINARY: ("L", "H"),
}

# FOUR code -> THREE code (LL->L, HL->M, LH->M, HH->H)
_FOUR_TO_THREE = np.array([0, 1, 1, 2])


@dataclass(frozen=True)
class Schema:
    """Column roles of a panel CSV."""

    id: str = "country"
    year: str = "year"
    reg: str = "reg"
    cont: str = "cont"
    outcome: str = "outcome"
    covariates: tuple = ()
    impol: str | None = None
    delimiter: str = ","

    @classmethod
    def from_mapping(cls, mapping):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown schema keys: {sorted(unknown)}")
        kw = dict(mapping)
        if "covariates" in kw:
            kw["covariates"] = tuple(kw["covariates"] or ())
        return cls(**kw)


class Unit(NamedTuple):
    country_id: str
    time: int
    covariates: np.ndarray
    reg: float
    cont: float
    outcome: float


@dataclass(frozen=True, eq=False)
class PanelFrame:
    """Column-oriented panel of (country, year) observations.

    Rows are kept sorted by ``(country, time)``; every operation that
    returns a new frame preserves that order.
    """

    country: np.ndarray
    time: np.ndarray
    covariates: np.ndarray
    reg: np.ndarray
    cont: np.ndarray
    outcome: np.ndarray
    covariate_names: tuple = ()
    impol: np.ndarray | None = None
    treatment_scheme: Scheme = Scheme.FOUR
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.country)
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != n:
            raise IntegrityError("covariate block must be N x P")
        object.__setattr__(self, "covariates", cov)
        for name in ("time",):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        for name in ("reg", "cont", "outcome"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise IntegrityError(f"column {name!r} has wrong length")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "country", np.asarray(self.country, dtype=object))
        if self.impol is not None:
            object.__setattr__(self, "impol", np.asarray(self.impol, dtype=float))
        if not self.covariate_names:
            object.__setattr__(self, "covariate_names",
                               tuple(f"x{j}" for j in range(cov.shape[1])))
        if len(self.covariate_names) != cov.shape[1]:
            raise IntegrityError("covariate_names does not match covariate count")
        if not np.all(np.isfinite(cov)):
            raise ParseError("missing or non-finite covariate values")
        if not np.all(np.isfinite(self.outcome)):
            raise ParseError("missing or non-finite outcome values")
        for name in ("reg", "cont"):
            arr = getattr(self, name)
            bad = np.flatnonzero(~((arr >= 0) & (arr <= 1)))
            if bad.size:
                raise RangeError(f"{name} outside [0, 1] at row {int(bad[0])}: {arr[bad[0]]}")
        if len(self.index) != n:
            raise IntegrityError("duplicate (country, time) rows")

    @property
    def n(self):
        return len(self.country)

    @property
    def P(self):
        return self.covariates.shape[1]

    @cached_property
    def index(self):
        return {(c, int(t)): i for i, (c, t) in enumerate(zip(self.country, self.time))}

    @property
    def units(self):
        return [Unit(self.country[i], int(self.time[i]), self.covariates[i],
                     float(self.reg[i]), float(self.cont[i]), float(self.outcome[i]))
                for i in range(self.n)]

    def years(self):
        return sorted(set(int(t) for t in self.time))

    def to_frame(self, schema=None):
        schema = schema or Schema(covariates=self.covariate_names)
        data = {schema.id: self.country, schema.year: self.time,
                schema.reg: self.reg, schema.cont: self.cont,
                schema.outcome: self.outcome}
        for j, name in enumerate(schema.covariates or self.covariate_names):
            data[name] = self.covariates[:, j]
        if self.impol is not None and schema.impol:
            data[schema.impol] = self.impol
        return pd.DataFrame(data)

    @classmethod
    def from_frame(cls, df, schema):
        """Build a sorted, validated frame from a DataFrame with ``schema`` columns."""
        required = [schema.id, schema.year, schema.reg, schema.cont, schema.outcome,
                    *schema.covariates]
        if schema.impol:
            required.append(schema.impol)
        missing = [c for c in required if c not in df.columns]
        if missing:
            raise SchemaError(f"missing column(s): {', '.join(missing)}")
        df = df.reset_index(drop=True)
        numeric = {}
        for col in required[1:]:
            raw = df[col]
            if raw.isna().any():
                row = int(np.flatnonzero(raw.isna().to_numpy())[0])
                raise ParseError(f"missing value in column {col!r} at row {row}", row=row)
            vals = pd.to_numeric(raw, errors="coerce")
            if vals.isna().any():
                row = int(np.flatnonzero(vals.isna().to_numpy())[0])
                raise ParseError(
                    f"non-numeric value {raw.iloc[row]!r} in column {col!r} at row {row}",
                    row=row)
            numeric[col] = vals.to_numpy(dtype=float)
        years = numeric[schema.year]
        if np.any(years != np.round(years)):
            row = int(np.flatnonzero(years != np.round(years))[0])
            raise ParseError(f"non-integer year at row {row}", row=row)
        country = df[schema.id].astype(str).to_numpy(dtype=object)
        time = years.astype(np.int64)
        dup = pd.Series(list(zip(country, time))).duplicated()
        if dup.any():
            row = int(np.flatnonzero(dup.to_numpy())[0])
            raise IntegrityError(
                f"duplicate (country, time) = ({country[row]}, {time[row]}) at row {row}")
        order = np.lexsort((time, np.unique(country, return_inverse=True)[1]))
        cov = (np.column_stack([numeric[c] for c in schema.covariates])
               if schema.covariates else np.empty((len(df), 0)))
        return cls(
            country=country[order],
            time=time[order],
            covariates=cov[order],
            reg=numeric[schema.reg][order],
            cont=numeric[schema.cont][order],
            outcome=numeric[schema.outcome][order],
            covariate_names=tuple(schema.covariates),
            impol=numeric[schema.impol][order] if schema.impol else None,
        )


def load_panel(path, schema):
    """Read a panel CSV (header row, UTF-8) into a :class:`PanelFrame`."""
    df = pd.read_csv(path, sep=schema.delimiter, encoding="utf-8",
                     dtype={schema.id: str})
    return PanelFrame.from_frame(df, schema)


def lag_align(panel, covariate_lag, outcome_lag, append_outcome=True):
    """Pair covariates at ``t`` with treatment at ``t + covariate_lag`` and the
    outcome ``outcome_lag`` years later.

    The returned rows are keyed by the treatment year. With a positive total
    lag and ``append_outcome`` the outcome observed at the covariate year is
    added as an extra covariate named ``<outcome>_lag`` (the outcome at the
    treatment year itself would be a post-treatment variable, so nothing is
    appended at zero total lag).
    """
    if covariate_lag < 0 or outcome_lag < 0:
        raise ValueError("lags must be non-negative")
    total = covariate_lag + outcome_lag
    if total == 0:
        return panel
    idx = panel.index
    keep, treat_rows, out_rows = [], [], []
    for i, (c, t) in enumerate(zip(panel.country, panel.time)):
        j = idx.get((c, int(t) + covariate_lag))
        k = idx.get((c, int(t) + total))
        if j is not None and k is not None:
            keep.append(i)
            treat_rows.append(j)
            out_rows.append(k)
    if not keep:
        raise EmptyResultError(
            f"no rows survive lags ({covariate_lag}, {outcome_lag}); panel too short")
    keep = np.array(keep)
    treat_rows = np.array(treat_rows)
    out_rows = np.array(out_rows)
    cov = panel.covariates[keep]
    names = panel.covariate_names
    if append_outcome:
        cov = np.column_stack([cov, panel.outcome[keep]])
        names = names + ("outcome_lag",)
    # (country, covariate year) order maps to (country, treatment year) order
    return PanelFrame(
        country=panel.country[keep],
        time=panel.time[treat_rows],
        covariates=cov,
        reg=panel.reg[treat_rows],
        cont=panel.cont[treat_rows],
        outcome=panel.outcome[out_rows],
        covariate_names=names,
        impol=None if panel.impol is None else panel.impol[treat_rows],
        treatment_scheme=panel.treatment_scheme,
        meta={**panel.meta, "lags": (covariate_lag, outcome_lag)},
    )


@dataclass(frozen=True, eq=False)
class TreatmentAssignment:
    """Integer category codes ``0..K-1`` together with their level names."""

    codes: np.ndarray
    levels: tuple
    reference: str
    scheme: Scheme | None = None
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        object.__setattr__(self, "codes", codes)
        K = len(self.levels)
        if K < 2:
            raise ValueError("need at least two categories")
        if codes.size and (codes.min() < 0 or codes.max() >= K):
            raise ValueError("category code out of range")
        if self.reference not in self.levels:
            raise ValueError(f"reference {self.reference!r} is not a level")

    @property
    def K(self):
        return len(self.levels)

    @property
    def labels(self):
        return np.asarray(self.levels, dtype=object)[self.codes]

    @property
    def reference_code(self):
        return self.levels.index(self.reference)

    def code(self, level):
        try:
            return self.levels.index(level)
        except ValueError:
            raise ValueError(f"unknown category {level!r}; levels are {self.levels}") from None

    def take(self, rows):
        return replace(self, codes=self.codes[rows])

    def counts(self):
        return np.bincount(self.codes, minlength=self.K)


def lower_median(values):
    """Order statistic at position ceil(N/2) (1-based)."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("median of empty sample")
    return float(v[math.ceil(v.size / 2) - 1])


def four_category_codes(reg, cont, med_reg, med_cont):
    hi_r = np.asarray(reg) > med_reg
    hi_c = np.asarray(cont) > med_cont
    # LL=0, HL=1, LH=2, HH=3
    return hi_r.astype(np.int64) + 2 * hi_c.astype(np.int64)


def categorize_treatment(panel, scheme=Scheme.FOUR, impol_weights=None):
    """Median-split categorization of the two restrictiveness indicators.

    Medians are lower medians over the rows of ``panel``; a value equal to
    the median counts as low. ``BINARY`` splits the combined policy index,
    taken from the panel's ``impol`` column or formed as
    ``w_reg * reg + w_cont * cont`` from ``impol_weights``.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.BINARY:
        if panel.impol is not None:
            index = panel.impol
        elif impol_weights is not None:
            w_reg, w_cont = impol_weights
            index = w_reg * panel.reg + w_cont * panel.cont
        else:
            raise ConfigError("BINARY scheme needs an impol column or impol_weights")
        med = lower_median(index)
        codes = (index > med).astype(np.int64)
        return TreatmentAssignment(codes, LEVELS[scheme], "L", scheme, {"impol": med})
    med_reg = lower_median(panel.reg)
    med_cont = lower_median(panel.cont)
    codes = four_category_codes(panel.reg, panel.cont, med_reg, med_cont)
    thresholds = {"reg": med_reg, "cont": med_cont}
    if scheme is Scheme.THREE:
        codes = _FOUR_TO_THREE[codes]
        return TreatmentAssignment(codes, LEVELS[scheme], "L", scheme, thresholds)
    return TreatmentAssignment(codes, LEVELS[scheme], "LL", scheme, thresholds)


def collapse_four_to_three(assignment):
    if assignment.levels != LEVELS[Scheme.FOUR]:
        raise ValueError("expected a FOUR-scheme assignment")
    return TreatmentAssignment(_FOUR_TO_THREE[assignment.codes], LEVELS[Scheme.THREE],
                               "L", Scheme.THREE, dict(assignment.thresholds))


def dummies(codes, K, reference=0):
    """N x (K-1) indicator matrix omitting the reference category."""
    cols = [k for k in range(K) if k != reference]
    return (np.asarray(codes)[:, None] == np.asarray(cols)[None, :]).astype(float)


def covariate_matrix(panel, columns: Sequence[str] | None = None):
    if columns is None:
        return panel.covariates
    pos = [panel.covariate_names.index(c) for c in columns]
    return panel.covariates[:, pos]
