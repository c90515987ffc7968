"""Direct-effect estimation over the exposure grid and bootstrap inference."""
from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import BootstrapError, DataError, FitError, NumericError
from .influence import build_influence
from .mnl import _level_code
from .pipeline import PipelineOptions, fit_pipeline, prepare_analysis

log = logging.getLogger(__name__)

DEFAULT_IIW = ((0.5, 0.5), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0))
MAX_DROPPED_SHARE = 0.2


def default_contrasts(levels, reference):
    return [(lv, reference) for lv in levels if lv != reference]


def _averaged_lambda(state, zp, z, weighting):
    """Per-unit grid-weighted means of the densities under ``zp`` and ``z``."""
    sums, gram = state.grid_moments
    s_z = sums[z]
    bad = np.flatnonzero(~(s_z > 0))
    if weighting == "symmetric":
        s_zp = sums[zp]
        bad = np.union1d(bad, np.flatnonzero(~(s_zp > 0)))
    if bad.size:
        i = int(bad[0])
        raise NumericError(
            f"all grid weights are zero for unit {state.data.country[i]} "
            f"year {state.data.time[i]}")
    if weighting == "baseline":
        return gram[z, zp] / s_z, gram[z, z] / s_z
    m_zp = 0.5 * (gram[z, zp] / s_z + gram[zp, zp] / s_zp)
    m_z = 0.5 * (gram[z, z] / s_z + gram[zp, z] / s_zp)
    return m_zp, m_z


def unit_contrasts(z_prime, z, state, weighting=None):
    """Per-unit grid-averaged imputed contrast ``Y_i(z', g) - Y_i(z, g)``."""
    levels = state.levels
    zp = _level_code(levels, z_prime)
    zb = _level_code(levels, z)
    weighting = weighting or state.options.weighting
    fit = state.outcome
    b = fit.treatment_effects()
    theta_phi = fit.coefficient("phi")
    out = (b[zp] - b[zb]) + theta_phi * (state.phi[:, zp] - state.phi[:, zb])
    if state.has_exposure:
        m_zp, m_z = _averaged_lambda(state, zp, zb, weighting)
        out = out + fit.coefficient("lambda") * (m_zp - m_z)
    return out


def estimate_direct_effect(z_prime, z, state, weighting=None):
    """Average over units of the imputed contrast between ``z_prime`` and
    ``z``, each unit's grid points weighted by its neighborhood density under
    the baseline ``z`` (or by the average of both categories' normalized
    densities with ``weighting="symmetric"``).

    The outcome model is linear, so exposure and year terms cancel in every
    contrast and only the density-weighted means of the imputed neighborhood
    propensity remain to be accumulated over the grid.
    """
    return float(np.mean(unit_contrasts(z_prime, z, state, weighting)))


def grid_weights(state, z, weighting="baseline", z_prime=None):
    """(N, G) normalized grid weights of every unit."""
    lam = state.grid_lambda(z)
    w = lam / lam.sum(axis=1, keepdims=True)
    if weighting == "symmetric":
        lam_p = state.grid_lambda(z_prime)
        w = 0.5 * (w + lam_p / lam_p.sum(axis=1, keepdims=True))
    return w


@dataclass
class EffectRow:
    z_prime: str
    z: str
    tau_hat: float
    std_err: float
    ci_low: float
    ci_high: float
    alpha: float
    beta: float
    n_replicates: int = 0
    n_dropped: int = 0

    @property
    def contrast(self):
        return f"{self.z_prime}-{self.z}"


@dataclass
class EffectTable:
    rows: list = field(default_factory=list)
    level: float = 0.95
    replicates: np.ndarray | None = None  # R x contrasts, NaN for dropped

    def to_frame(self):
        recs = []
        for r in self.rows:
            d = asdict(r)
            recs.append({"alpha": d.pop("alpha"), "beta": d.pop("beta"),
                         "contrast": r.contrast, **d})
        cols = ["alpha", "beta", "contrast", "z_prime", "z", "tau_hat", "std_err",
                "ci_low", "ci_high", "n_replicates", "n_dropped"]
        return pd.DataFrame(recs, columns=cols)

    def row(self, z_prime, z):
        for r in self.rows:
            if r.z_prime == z_prime and r.z == z:
                return r
        raise KeyError(f"no contrast {z_prime}-{z}")


def tables_to_frame(tables):
    return pd.concat([t.to_frame() for t in tables], ignore_index=True)


def write_effects_csv(tables, path):
    tables_to_frame(tables).to_csv(path, index=False, float_format="%.10g",
                                   lineterminator="\n")


def write_effects_json(tables, path, level=0.95):
    recs = tables_to_frame(tables).to_dict(orient="records")
    payload = {"ci_level": level, "effects": recs}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def point_estimates(state, contrasts, weighting=None):
    return np.array([estimate_direct_effect(zp, z, state, weighting) for zp, z in contrasts])


def _replicate(data, options, contrasts, child, resample, cluster):
    rng = np.random.default_rng(child)
    n = data.n
    if not resample:
        rows = np.arange(n)
    elif cluster:
        countries = np.unique(data.country)
        drawn = rng.choice(countries, size=len(countries), replace=True)
        rows = np.concatenate([np.flatnonzero(data.country == c) for c in drawn])
    else:
        rows = rng.integers(0, n, size=n)
    try:
        state = fit_pipeline(data.take(rows), options)
        return point_estimates(state, contrasts)
    except (FitError, DataError, np.linalg.LinAlgError) as exc:
        log.info("bootstrap replicate dropped: %s", exc)
        return None


def bootstrap(data, options=None, R=200, seed=0, level=0.95, contrasts=None, threads=1,
              resample=True, cluster=False, state=None):
    """Point estimates with bootstrap standard errors and percentile intervals.

    Each replicate re-estimates the whole pipeline on a resample of units
    drawn with replacement (or of countries with ``cluster=True``). Replicate
    ``r`` draws from its own stream spawned from ``seed``, so results do not
    depend on ``threads``. ``resample=False`` refits on the full sample every
    time, which is only useful for testing.
    """
    if R < 2:
        raise ValueError("need at least two bootstrap replicates")
    options = options or PipelineOptions()
    contrasts = contrasts or default_contrasts(data.levels, data.reference)
    state = state or fit_pipeline(data, options)
    tau = point_estimates(state, contrasts)

    children = np.random.SeedSequence(seed).spawn(R)
    rep_options = options if threads <= 1 else replace(options, threads=1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda ch: _replicate(data, rep_options, contrasts, ch, resample, cluster),
                children))
    else:
        results = [_replicate(data, rep_options, contrasts, ch, resample, cluster)
                   for ch in children]
    reps = np.full((R, len(contrasts)), np.nan)
    for r, res in enumerate(results):
        if res is not None:
            reps[r] = res
    ok = ~np.isnan(reps).any(axis=1)
    dropped = int(R - ok.sum())
    if dropped:
        warnings.warn(f"{dropped} of {R} bootstrap replicates dropped after fit failures",
                      stacklevel=2)
    if dropped > MAX_DROPPED_SHARE * R or ok.sum() < 2:
        raise BootstrapError(f"{dropped} of {R} bootstrap replicates failed")
    good = reps[ok]
    se = good.std(axis=0, ddof=1)
    lo_q, hi_q = (1 - level) / 2, (1 + level) / 2
    lo = np.quantile(good, lo_q, axis=0)
    hi = np.quantile(good, hi_q, axis=0)
    alpha, beta = data.iiw
    rows = []
    for j, (zp, z) in enumerate(contrasts):
        c_lo, c_hi = float(lo[j]), float(hi[j])
        if not c_lo <= tau[j] <= c_hi:
            log.warning("point estimate %s-%s outside its percentile interval; widened",
                        zp, z)
            c_lo, c_hi = min(c_lo, tau[j]), max(c_hi, tau[j])
        rows.append(EffectRow(zp, z, float(tau[j]), float(se[j]), c_lo, c_hi,
                              float(alpha), float(beta), int(ok.sum()), dropped))
    return EffectTable(rows, level, reps)


def run_iiw_sweep(panel, assignment, raw, configs=DEFAULT_IIW, options=None, R=200, seed=0,
                  level=0.95, contrasts=None, threads=1, cluster=False, states=None):
    """One :class:`EffectTable` per influence-weight configuration.

    ``states``, if given, is filled with the full-sample fitted pipeline of
    every configuration, keyed by ``(alpha, beta)``.
    """
    options = options or PipelineOptions()
    units = list(zip(panel.country, panel.time))
    tables = []
    for alpha, beta in configs:
        graph = build_influence(raw, alpha, beta, units=units)
        data = prepare_analysis(panel, assignment, graph)
        state = fit_pipeline(data, options)
        if states is not None:
            states[(alpha, beta)] = state
        tables.append(bootstrap(data, options, R=R, seed=seed, level=level,
                                contrasts=contrasts, threads=threads, cluster=cluster,
                                state=state))
    return tables
