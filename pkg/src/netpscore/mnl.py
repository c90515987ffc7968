"""Multinomial logit model for the individual propensity score.

Coefficients are stored per non-reference category as rows
``[intercept, slope_1, ..., slope_P]``; the reference category's linear
predictor is fixed at zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from .errors import ConvergenceError, DataError, DomainError, RankError

log = logging.getLogger(__name__)


def _full_eta(coef, D, reference):
    eta = D @ coef.T  # N x (K-1)
    return np.insert(eta, reference, 0.0, axis=1)


def mnl_probabilities(coef, D, reference=0):
    """N x K category probabilities for design ``D`` (intercept column included)."""
    eta = _full_eta(np.asarray(coef, dtype=float), D, reference)
    eta -= eta.max(axis=1, keepdims=True)
    p = np.exp(eta)
    return p / p.sum(axis=1, keepdims=True)


def _others(K, reference):
    return np.array([k for k in range(K) if k != reference])


def mnl_loglik(coef, D, codes, K, reference=0, ridge=0.0):
    """Log-likelihood, minus ``ridge/2`` times the squared slope norm."""
    coef = np.asarray(coef, dtype=float).reshape(K - 1, D.shape[1])
    eta = _full_eta(coef, D, reference)
    ll = eta[np.arange(len(codes)), codes].sum() - logsumexp(eta, axis=1).sum()
    return float(ll - 0.5 * ridge * np.sum(coef[:, 1:] ** 2))


def mnl_score(coef, D, codes, K, reference=0, ridge=0.0):
    coef = np.asarray(coef, dtype=float).reshape(K - 1, D.shape[1])
    p = mnl_probabilities(coef, D, reference)
    y = np.eye(K)[codes]
    others = _others(K, reference)
    g = (y[:, others] - p[:, others]).T @ D
    pen = ridge * coef
    pen[:, 0] = 0.0
    return (g - pen).ravel()


def mnl_hessian(coef, D, codes, K, reference=0, ridge=0.0):
    coef = np.asarray(coef, dtype=float).reshape(K - 1, D.shape[1])
    p = mnl_probabilities(coef, D, reference)[:, _others(K, reference)]
    W = -(p[:, :, None] * p[:, None, :])
    idx = np.arange(K - 1)
    W[:, idx, idx] += p
    p_dim = D.shape[1]
    DD = (D[:, :, None] * D[:, None, :]).reshape(len(D), -1)
    H = -(W.reshape(len(D), -1).T @ DD).reshape(K - 1, K - 1, p_dim, p_dim)
    H = H.transpose(0, 2, 1, 3).reshape((K - 1) * p_dim, (K - 1) * p_dim)
    if ridge:
        diag = np.tile(np.r_[0.0, np.full(p_dim - 1, ridge)], K - 1)
        H -= np.diag(diag)
    return H


@dataclass(frozen=True, eq=False)
class MnlFit:
    coef: np.ndarray
    levels: tuple
    reference: str
    loglik: float
    converged: bool
    iterations: int
    covariate_names: tuple = ()
    cov: np.ndarray | None = None
    ridge: float = 0.0
    loglik_path: tuple = field(default=())

    @property
    def K(self):
        return len(self.levels)

    @property
    def reference_code(self):
        return self.levels.index(self.reference)

    def design(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.coef.shape[1] - 1:
            raise ValueError(f"expected {self.coef.shape[1] - 1} covariates, got {x.shape[1]}")
        return np.column_stack([np.ones(len(x)), x])

    def predict_proba(self, x):
        return mnl_probabilities(self.coef, self.design(x), self.reference_code)

    def predict_phi(self, z, x):
        """Probability of category ``z`` (level name or code) at covariates ``x``."""
        k = _level_code(self.levels, z)
        x = np.asarray(x, dtype=float)
        p = self.predict_proba(x)[:, k]
        return float(p[0]) if x.ndim == 1 else p

    def std_errors(self):
        if self.cov is None:
            return None
        return np.sqrt(np.clip(np.diag(self.cov), 0, None)).reshape(self.coef.shape)

    def to_frame(self):
        """Coefficient table: one row per regressor, one column pair per
        non-reference category (estimate and standard error)."""
        names = ("(Intercept)",) + tuple(self.covariate_names)
        se = self.std_errors()
        data = {"term": names}
        others = [lv for lv in self.levels if lv != self.reference]
        for r, lv in enumerate(others):
            data[lv] = self.coef[r]
            data[f"{lv}_se"] = se[r] if se is not None else np.nan
        return pd.DataFrame(data)


def _level_code(levels, z):
    if isinstance(z, (int, np.integer)):
        if not 0 <= z < len(levels):
            raise DomainError(f"unknown category code {z}")
        return int(z)
    try:
        return levels.index(z)
    except ValueError:
        raise DomainError(f"unknown category {z!r}; levels are {levels}") from None


def fit_mnl(x, z, ridge=0.0, tol=1e-8, max_iter=100, covariate_names=None):
    """Maximum-likelihood multinomial logit by Newton-Raphson with step halving.

    Covariates are z-scored internally and coefficients reported on the
    original scale. The fit stops once two consecutive iterations change
    the (penalized) log-likelihood by less than ``tol`` relative.

    Parameters
    ----------
    x : array (N, P)
        Covariates, without an intercept column.
    z : TreatmentAssignment
        Observed categories; every category must occur at least once.
    ridge : float
        Penalty on standardized slopes. Zero gives the plain MLE; a small
        positive value keeps the fit finite under (quasi-)separation.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    codes = np.asarray(z.codes)
    K = z.K
    ref = z.reference_code
    N, P = x.shape
    if len(codes) != N:
        raise DataError("covariates and treatment have different lengths")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite covariate values")
    counts = np.bincount(codes, minlength=K)
    if np.any(counts == 0):
        empty = [z.levels[k] for k in np.flatnonzero(counts == 0)]
        raise DataError(f"category with zero observations: {', '.join(empty)}")
    names = tuple(covariate_names) if covariate_names is not None else tuple(
        f"x{j}" for j in range(P))

    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    const = np.flatnonzero(sd == 0)
    if const.size:
        raise RankError("constant covariate(s) collinear with the intercept: "
                        + ", ".join(names[j] for j in const), [names[j] for j in const])
    D = np.column_stack([np.ones(N), (x - mean) / sd])
    p_dim = P + 1

    theta = np.zeros((K - 1, p_dim))
    # start intercepts at the empirical log-odds
    others = _others(K, ref)
    theta[:, 0] = np.log(counts[others] / counts[ref])
    ll = mnl_loglik(theta, D, codes, K, ref, ridge)
    path = [ll]
    quiet = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = mnl_score(theta, D, codes, K, ref, ridge)
        H = mnl_hessian(theta, D, codes, K, ref, ridge)
        try:
            step = np.linalg.solve(-H, g).reshape(theta.shape)
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                "singular Hessian; likely (quasi-)separation",
                last_coef=theta, diagnostic=_separation_diagnostic(theta, D, codes, K, ref),
            ) from None
        t = 1.0
        for _ in range(40):
            cand = theta + t * step
            ll_new = mnl_loglik(cand, D, codes, K, ref, ridge)
            if np.isfinite(ll_new) and ll_new >= ll - 1e-12 * abs(ll):
                break
            t *= 0.5
        else:
            raise ConvergenceError("step halving failed to improve the log-likelihood",
                                   last_coef=theta,
                                   diagnostic=_separation_diagnostic(theta, D, codes, K, ref))
        change = abs(ll_new - ll) / max(abs(ll_new), 1e-300)
        theta, ll = cand, ll_new
        path.append(ll)
        quiet = quiet + 1 if change < tol else 0
        if quiet >= 2:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"multinomial logit did not converge in {max_iter} iterations",
            last_coef=theta, diagnostic=_separation_diagnostic(theta, D, codes, K, ref))
    diag = _separation_diagnostic(theta, D, codes, K, ref)
    if not ridge and (diag["max_abs_std_coef"] > SEPARATION_LIMIT
                      or diag["share_fitted_certain"] == 1.0):
        # the likelihood flattened out at infinity rather than at a maximum
        raise ConvergenceError(
            "coefficients diverge: (quasi-)complete separation; consider a ridge penalty",
            last_coef=theta, diagnostic=diag)

    T = np.zeros((p_dim, p_dim))
    T[0, 0] = 1.0
    T[0, 1:] = -mean / sd
    T[1:, 1:] = np.diag(1.0 / sd)
    coef = theta @ T.T
    H = mnl_hessian(theta, D, codes, K, ref, ridge)
    try:
        cov_std = np.linalg.inv(-H)
        big_T = np.kron(np.eye(K - 1), T)
        cov = big_T @ cov_std @ big_T.T
    except np.linalg.LinAlgError:
        cov = None
    log.debug("mnl converged in %d iterations, loglik %.6f", it, ll)
    return MnlFit(coef=coef, levels=tuple(z.levels), reference=z.reference, loglik=ll,
                  converged=True, iterations=it, covariate_names=names, cov=cov,
                  ridge=ridge, loglik_path=tuple(path))


# log-odds change per standard deviation beyond which a fit is treated as separated
SEPARATION_LIMIT = 30.0


def _separation_diagnostic(theta, D, codes, K, ref):
    p = mnl_probabilities(theta, D, ref)
    p_obs = p[np.arange(len(codes)), codes]
    return {
        "max_abs_std_coef": float(np.abs(theta[:, 1:]).max()) if theta.shape[1] > 1 else 0.0,
        "share_fitted_certain": float(np.mean(p_obs > 1 - 1e-6)),
    }
