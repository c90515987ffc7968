"""Finite-sample checks of covariate balance and of the exposure transform."""
from __future__ import annotations

import numpy as np
import pandas as pd
from scipy import stats


def standardized_difference(x, treated):
    """Standardized mean difference of every column of ``x`` between the
    ``treated`` rows and the rest, using the average of the two group
    variances. Columns with zero spread in both groups get 0."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    treated = np.asarray(treated, dtype=bool)
    a, b = x[treated], x[~treated]
    if len(a) < 2 or len(b) < 2:
        return np.full(x.shape[1], np.nan)
    diff = a.mean(axis=0) - b.mean(axis=0)
    scale = np.sqrt(0.5 * (a.var(axis=0, ddof=1) + b.var(axis=0, ddof=1)))
    out = np.zeros(x.shape[1])
    ok = scale > 0
    out[ok] = diff[ok] / scale[ok]
    return out


def _quantile_bins(values, n_bins):
    if n_bins <= 1:
        return np.zeros(len(values), dtype=np.int64)
    edges = np.quantile(values, np.linspace(0, 1, n_bins + 1)[1:-1])
    return np.searchsorted(edges, values, side="right")


def balance_table(state, n_phi_bins=5, n_lambda_bins=2):
    """Covariate balance of each category against all others, raw and within
    strata of the estimated propensities.

    Units are stratified on quantile bins of the individual propensity of the
    category and, when exposures are modelled, on bins of the neighborhood
    propensity of their own exposure under that category.

    Returns a long frame with one row per (category, covariate, stratum);
    stratum ``"raw"`` is the unstratified comparison.
    """
    data = state.data
    x = data.x
    names = list(data.covariate_names)
    rows = []
    for k, lv in enumerate(data.levels):
        d = data.codes == k
        for j, v in enumerate(standardized_difference(x, d)):
            rows.append((lv, names[j], "raw", v, int(d.sum()), int((~d).sum())))
        strata = _quantile_bins(state.phi[:, k], n_phi_bins)
        if state.has_exposure and n_lambda_bins > 1:
            mu = state.mvlr.mean(k, state.x_g)
            lam = np.exp(state.mvlr.log_density(state.g_star, mu))
            strata = strata * n_lambda_bins + _quantile_bins(lam, n_lambda_bins)
        for s in np.unique(strata):
            m = strata == s
            smd = standardized_difference(x[m], d[m])
            for j, v in enumerate(smd):
                rows.append((lv, names[j], f"bin{s}", v, int(d[m].sum()), int((~d[m]).sum())))
    return pd.DataFrame(rows, columns=["category", "covariate", "stratum", "smd",
                                       "n_treated", "n_control"])


def balance_summary(table):
    """Median absolute standardized difference, raw and within strata, per
    category (strata with too few units in a group are ignored)."""
    t = table.dropna(subset=["smd"]).assign(abs_smd=lambda f: f["smd"].abs())
    t["kind"] = np.where(t["stratum"] == "raw", "raw", "within")
    out = t.pivot_table(index="category", columns="kind", values="abs_smd",
                        aggfunc="median", sort=False)
    return out.reindex(columns=["raw", "within"]).reset_index()


def orq_normality(g_star, levels, n_bins=10):
    """KS distance to the standard normal and Pearson statistic over
    ``n_bins`` equiprobable normal cells (divided by its degrees of freedom)
    for every transformed exposure column."""
    g_star = np.asarray(g_star, dtype=float)
    edges = stats.norm.ppf(np.linspace(0, 1, n_bins + 1)[1:-1])
    rows = []
    for k, lv in enumerate(levels):
        col = g_star[:, k]
        ks = stats.kstest(col, "norm").statistic
        counts = np.bincount(np.searchsorted(edges, col), minlength=n_bins)
        expected = len(col) / n_bins
        pearson = float(((counts - expected) ** 2 / expected).sum())
        rows.append((lv, len(col), float(ks), pearson / (n_bins - 1)))
    return pd.DataFrame(rows, columns=["level", "n", "ks", "pearson_per_df"])
