"""Multivariate multiple linear regression for the transformed exposures and
the Gaussian neighborhood propensity density built on it."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats
from scipy.linalg import cho_solve, solve_triangular

from .errors import DataError, NumericError, RankError
from .mnl import _level_code
from .panel import dummies

log = logging.getLogger(__name__)

JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


def stable_cholesky(sigma):
    """Cholesky factor of ``sigma + eps * I`` with the smallest working ``eps``
    from 0, 1e-10, ..., 1e-6."""
    sigma = np.asarray(sigma, dtype=float)
    eye = np.eye(len(sigma))
    for eps in JITTERS:
        try:
            return np.linalg.cholesky(sigma + eps * eye), eps
        except np.linalg.LinAlgError:
            continue
    raise NumericError("residual covariance is singular even after jitter 1e-6")


def collinear_columns(X, names, tol=None):
    """Names of columns that are linear combinations of earlier ones."""
    bad = []
    kept = []
    scale = np.linalg.norm(X, axis=0)
    for j in range(X.shape[1]):
        cand = kept + [j]
        sub = X[:, cand] / np.where(scale[cand] > 0, scale[cand], 1.0)
        if scale[j] == 0 or np.linalg.matrix_rank(sub, tol=tol) < len(cand):
            bad.append(names[j])
        else:
            kept.append(j)
    return bad


def ols(X, Y, names):
    """Least squares with an explicit rank check."""
    N, p = X.shape
    if N <= p:
        raise DataError(f"insufficient data: {N} rows for {p} regressors")
    if np.linalg.matrix_rank(X) < p:
        cols = collinear_columns(X, names)
        raise RankError(f"rank-deficient design; collinear column(s): {', '.join(cols)}", cols)
    coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return coef


@dataclass(frozen=True, eq=False)
class MvlrFit:
    """Fitted mean model ``G* ~ 1 + X_g + treatment dummies`` with pooled
    residual covariance."""

    coef: np.ndarray  # p x K, rows = regressors, columns = exposure levels
    sigma: np.ndarray
    dof: int
    levels: tuple
    reference: str
    regressor_names: tuple
    xtx_inv: np.ndarray
    response_mean: np.ndarray
    response_sd: np.ndarray
    chol: np.ndarray
    jitter: float

    @property
    def K(self):
        return len(self.levels)

    @property
    def dim(self):
        return self.coef.shape[1]

    @property
    def reference_code(self):
        return self.levels.index(self.reference)

    def design(self, codes, x_g):
        x_g = np.atleast_2d(np.asarray(x_g, dtype=float))
        codes = np.broadcast_to(np.asarray(codes), (len(x_g),))
        return np.column_stack([np.ones(len(x_g)), x_g,
                                dummies(codes, self.K, self.reference_code)])

    def mean(self, z, x_g):
        """Fitted mean of ``G*`` for category ``z`` (name, code or code array)."""
        if isinstance(z, str):
            z = _level_code(self.levels, z)
        return self.design(z, x_g) @ self.coef

    @property
    def log_norm(self):
        return -0.5 * self.dim * np.log(2 * np.pi) - np.log(np.diag(self.chol)).sum()

    def log_density(self, g, mu):
        """Log of the normal density with covariance ``sigma`` at rows of ``g - mu``."""
        d = np.atleast_2d(np.asarray(g, dtype=float) - np.asarray(mu, dtype=float))
        w = solve_triangular(self.chol, d.T, lower=True)
        return self.log_norm - 0.5 * np.sum(w * w, axis=0)

    def to_frame(self):
        se = np.sqrt(np.outer(np.diag(self.xtx_inv), np.diag(self.sigma)))
        data = {"term": self.regressor_names}
        for k, lv in enumerate(self.levels):
            data[f"G_{lv}"] = self.coef[:, k]
            data[f"G_{lv}_se"] = se[:, k]
        return pd.DataFrame(data)

    def omnibus(self):
        """Multivariate Wald test per regressor group (all treatment dummies
        form one group): statistic, degrees of freedom and p-value."""
        rows = []
        names = self.regressor_names
        groups = {}
        for j, name in enumerate(names):
            key = "Z" if name.startswith("Z_") else name
            groups.setdefault(key, []).append(j)
        sigma_inv = cho_solve((self.chol, True), np.eye(self.dim))
        for key, idx in groups.items():
            B = self.coef[idx]  # q x K
            V = self.xtx_inv[np.ix_(idx, idx)]
            # vec(B) has covariance kron(V, sigma)
            stat = float(np.trace(np.linalg.solve(V, B) @ sigma_inv @ B.T))
            df = B.size
            rows.append((key, stat, df, float(stats.chi2.sf(stat, df))))
        return pd.DataFrame(rows, columns=["term", "wald", "df", "p_value"])


def fit_mvlr(g_star, z, x_g, regressor_names=None):
    """Regress every transformed exposure column on the covariates and the
    treatment dummies; estimate the pooled residual covariance with divisor
    ``N - p``."""
    Y = np.asarray(g_star, dtype=float)
    x_g = np.asarray(x_g, dtype=float)
    if x_g.ndim == 1:
        x_g = x_g[:, None]
    N, K = Y.shape
    ref = z.reference_code
    names = tuple(regressor_names) if regressor_names is not None else tuple(
        f"x{j}" for j in range(x_g.shape[1]))
    dummy_names = tuple(f"Z_{lv}" for k, lv in enumerate(z.levels) if k != ref)
    all_names = ("(Intercept)",) + names + dummy_names
    X = np.column_stack([np.ones(N), x_g, dummies(z.codes, z.K, ref)])
    p = X.shape[1]
    if N <= p + 1:
        raise DataError(f"insufficient data: {N} rows for {p} regressors")
    coef = ols(X, Y, all_names)
    R = Y - X @ coef
    dof = N - p
    sigma = R.T @ R / dof
    sigma = 0.5 * (sigma + sigma.T)
    chol, eps = stable_cholesky(sigma)
    if eps:
        log.warning("residual covariance regularized with jitter %.0e", eps)
    xtx_inv = np.linalg.inv(X.T @ X)
    return MvlrFit(coef=coef, sigma=sigma, dof=dof, levels=tuple(z.levels),
                   reference=z.reference, regressor_names=all_names, xtx_inv=xtx_inv,
                   response_mean=Y.mean(axis=0), response_sd=Y.std(axis=0, ddof=1),
                   chol=chol, jitter=eps)


def lambda_density(fit, g, z, x_g):
    """Neighborhood propensity: normal density of exposure vector ``g`` given
    category ``z`` and covariates ``x_g``."""
    mu = fit.mean(z, np.atleast_2d(x_g))
    return float(np.exp(fit.log_density(np.asarray(g, dtype=float)[None, :], mu))[0])


def predict_actual_lambda(fit, g_star, codes, x_g):
    """Density of each unit's own transformed exposure under its own category."""
    mu = fit.mean(np.asarray(codes), x_g)
    lam = np.exp(fit.log_density(g_star, mu))
    bad = np.flatnonzero(~(lam > 0) | ~np.isfinite(lam))
    if bad.size:
        raise NumericError(f"non-positive neighborhood density for unit {int(bad[0])}")
    return lam
