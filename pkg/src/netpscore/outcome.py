"""Outcome regression on treatment, exposure and propensity scores, with year
fixed effects, and potential-outcome imputation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataError, DomainError
from .mnl import _level_code
from .mvlr import ols
from .panel import dummies


@dataclass(frozen=True, eq=False)
class OutcomeFit:
    coef: np.ndarray
    names: tuple
    residual_variance: float
    cov: np.ndarray
    levels: tuple
    reference: str
    years: tuple
    has_exposure: bool
    fitted: np.ndarray

    @property
    def K(self):
        return len(self.levels)

    @property
    def reference_code(self):
        return self.levels.index(self.reference)

    def coefficient(self, name):
        return float(self.coef[self.names.index(name)])

    def treatment_effects(self):
        """Coefficient of every level relative to the reference (reference = 0)."""
        out = np.zeros(self.K)
        for k, lv in enumerate(self.levels):
            if k != self.reference_code:
                out[k] = self.coefficient(f"Z_{lv}")
        return out

    def design(self, codes, g, phi, lam, time):
        codes = np.atleast_1d(np.asarray(codes))
        time = np.atleast_1d(np.asarray(time))
        n = max(len(codes), len(time))
        codes = np.broadcast_to(codes, (n,))
        time = np.broadcast_to(time, (n,))
        cols = [np.ones(n), dummies(codes, self.K, self.reference_code)]
        if self.has_exposure:
            cols.append(np.broadcast_to(np.atleast_2d(np.asarray(g, dtype=float)), (n, self.K)))
        cols.append(np.broadcast_to(np.asarray(phi, dtype=float), (n,)))
        if self.has_exposure:
            cols.append(np.broadcast_to(np.asarray(lam, dtype=float), (n,)))
        cols.append(_year_dummies(time, self.years))
        return np.column_stack(cols)

    def predict(self, codes, g, phi, lam, time):
        return self.design(codes, g, phi, lam, time) @ self.coef

    def to_frame(self):
        se = np.sqrt(np.clip(np.diag(self.cov), 0, None))
        return pd.DataFrame({"term": self.names, "estimate": self.coef, "std_err": se})


def _year_dummies(time, years):
    unknown = set(np.unique(time).tolist()) - set(years)
    if unknown:
        raise DomainError(f"unknown time level(s): {sorted(unknown)}")
    return (np.asarray(time)[:, None] == np.asarray(years[1:])[None, :]).astype(float)


def fit_outcome(y, z, g_star, phi_hat, lambda_hat, time):
    """OLS of ``y`` on treatment dummies, transformed exposures, the actual
    individual and neighborhood propensity scores and year dummies.

    Pass ``g_star=None`` and ``lambda_hat=None`` when there is no
    interference; the exposure and density terms are then left out.
    """
    y = np.asarray(y, dtype=float)
    time = np.asarray(time)
    N = len(y)
    years = tuple(int(t) for t in np.unique(time))
    if len(years) < 2:
        raise DataError("need at least two distinct years for time fixed effects")
    has_exposure = g_star is not None
    if has_exposure != (lambda_hat is not None):
        raise ValueError("g_star and lambda_hat must be given together")
    ref = z.reference_code
    names = ["(Intercept)"] + [f"Z_{lv}" for k, lv in enumerate(z.levels) if k != ref]
    cols = [np.ones(N), dummies(z.codes, z.K, ref)]
    if has_exposure:
        names += [f"G_{lv}" for lv in z.levels]
        cols.append(np.asarray(g_star, dtype=float))
    names.append("phi")
    cols.append(np.asarray(phi_hat, dtype=float))
    if has_exposure:
        names.append("lambda")
        cols.append(np.asarray(lambda_hat, dtype=float))
    names += [f"T_{t}" for t in years[1:]]
    cols.append(_year_dummies(time, years))
    X = np.column_stack(cols)
    names = tuple(names)
    coef = ols(X, y, names)
    fitted = X @ coef
    resid = y - fitted
    dof = N - X.shape[1]
    s2 = float(resid @ resid / dof)
    cov = s2 * np.linalg.inv(X.T @ X)
    return OutcomeFit(coef=coef, names=names, residual_variance=s2, cov=cov,
                      levels=tuple(z.levels), reference=z.reference, years=years,
                      has_exposure=has_exposure, fitted=fitted)


def impute_potential_outcome(fit, z, g, phi_z, lambda_zg, time):
    """Conditional-mean potential outcome at a counterfactual joint treatment."""
    k = _level_code(fit.levels, z)
    return float(fit.predict(k, g, phi_z, lambda_zg, time)[0])
