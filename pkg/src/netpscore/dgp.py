"""Synthetic panels with known direct effects.

Countries sit at random positions in the unit square. Geography gives the
hop counts and distances, and cultural similarity decays with distance in a
latent culture space that drifts slowly over time. Covariates mix a
spatially smooth country component, a common year shock and noise, so
nearby countries tend to share treatment categories. Treatments are drawn
from a multinomial logit in the lagged covariates and written as the two
restrictiveness indicators; the outcome is linear in the treatment dummies,
the neighborhood exposures and (optionally) the covariates.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from .errors import ConfigError, DomainError
from .influence import build_influence, validate_pairwise
from .mnl import mnl_probabilities
from .panel import LEVELS, PanelFrame, Scheme, four_category_codes, lower_median

SCHEME_FOR_K = {4: Scheme.FOUR, 3: Scheme.THREE, 2: Scheme.BINARY}


@dataclass
class DgpSpec:
    n_countries: int = 22
    n_years: int = 30
    K: int = 4
    n_covariates: int = 15
    covariate_lag: int = 1
    outcome_lag: int = 1
    treatment_coefs: list | None = None  # (K-1) x (P+1), reference category first level
    treatment_scale: float = 1.0
    region_loading: float = 1.0
    year_loading: float = 0.5
    outcome_coefs: list | None = None  # direct effect of each level, length K
    spillover_coefs: list | None = None  # effect of exposure to each level, length K
    covariate_outcome_coefs: list | None = None
    base_outcome: float = 5.0
    year_outcome_coef: float = 0.3
    noise_sd: float = 0.3
    true_iiw: tuple = (0.5, 0.5)
    seed: int = 0

    def __post_init__(self):
        if self.K not in SCHEME_FOR_K:
            raise ConfigError(f"K must be 2, 3 or 4, got {self.K}")
        if self.n_countries < 3 or self.n_years < self.covariate_lag + self.outcome_lag + 2:
            raise ConfigError("panel too small for the requested lags")
        if not self.noise_sd > 0:
            raise ConfigError("noise_sd must be positive")
        if self.covariate_lag < 0 or self.outcome_lag < 0:
            raise ConfigError("lags must be non-negative")
        K, P = self.K, self.n_covariates
        if self.outcome_coefs is None:
            self.outcome_coefs = list(DEFAULT_OUTCOME[K])
        if self.spillover_coefs is None:
            self.spillover_coefs = [0.0] + [0.1] * (K - 1)
        if self.covariate_outcome_coefs is None:
            self.covariate_outcome_coefs = [0.0] * P
        if self.treatment_coefs is None:
            self.treatment_coefs = default_treatment_coefs(K, P).tolist()
        shapes = {
            "outcome_coefs": (np.shape(self.outcome_coefs), (K,)),
            "spillover_coefs": (np.shape(self.spillover_coefs), (K,)),
            "covariate_outcome_coefs": (np.shape(self.covariate_outcome_coefs), (P,)),
            "treatment_coefs": (np.shape(self.treatment_coefs), (K - 1, P + 1)),
        }
        for name, (got, want) in shapes.items():
            if got != want:
                raise ConfigError(f"{name} has shape {got}, expected {want}")
        a, b = self.true_iiw
        if a < 0 or b < 0 or abs(a + b - 1) > 1e-12 and abs(a + b) > 1e-12:
            raise ConfigError("true_iiw must be non-negative with sum 0 or 1")
        self.true_iiw = (float(a), float(b))

    @property
    def levels(self):
        return LEVELS[SCHEME_FOR_K[self.K]]

    @property
    def scheme(self):
        return SCHEME_FOR_K[self.K]

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping or {}) - known
        if unknown:
            raise ConfigError(f"unknown DGP keys: {sorted(unknown)}")
        kw = dict(mapping or {})
        if "true_iiw" in kw:
            kw["true_iiw"] = tuple(kw["true_iiw"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_mapping(self):
        d = asdict(self)
        d["true_iiw"] = list(self.true_iiw)
        return d


DEFAULT_OUTCOME = {4: (0.0, 0.2, 0.3, 0.1), 3: (0.0, 0.2, 0.3), 2: (0.0, 0.2)}


def default_treatment_coefs(K, P):
    rng = np.random.default_rng(20240601)
    coefs = np.zeros((K - 1, P + 1))
    coefs[:, 1:] = rng.normal(0.0, 1.0 / np.sqrt(P), size=(K - 1, P))
    return coefs


def true_direct_effect(spec, z_prime, z):
    levels = spec.levels
    try:
        a, b = levels.index(z_prime), levels.index(z)
    except ValueError:
        raise DomainError(f"unknown category in ({z_prime!r}, {z!r}); levels are {levels}") from None
    return float(spec.outcome_coefs[a] - spec.outcome_coefs[b])


def true_effects(spec):
    levels = spec.levels
    return {f"{a}-{b}": true_direct_effect(spec, a, b)
            for a in levels for b in levels if a != b}


@dataclass
class SyntheticData:
    spec: DgpSpec
    panel: PanelFrame
    pairwise: pd.DataFrame
    graph: object
    truth: dict
    latent_codes: np.ndarray  # (n_countries, n_years) drawn categories
    latent_probs: np.ndarray  # (n_countries, n_years, K)
    codes: np.ndarray  # (n_countries, n_years) median-split categories
    exposure: np.ndarray  # (n_countries, n_years, K)
    extra: dict = field(default_factory=dict)


def _world(spec, rng):
    C = spec.n_countries
    pos = rng.uniform(size=(C, 2))
    d = cdist(pos, pos)
    dist_std = d / d.max()
    radius = 0.25
    while True:
        adj = (d < radius) & ~np.eye(C, dtype=bool)
        sp = shortest_path(adj.astype(float), unweighted=True, directed=False)
        if np.all(np.isfinite(sp)):
            break
        radius *= 1.2
    culture = np.column_stack([pos, rng.normal(scale=0.3, size=(C, 1))])
    ling_drift = rng.normal(scale=0.01, size=(C, 3))
    relig_base = culture + rng.normal(scale=0.2, size=culture.shape)
    relig_drift = rng.normal(scale=0.01, size=(C, 3))
    return pos, dist_std, sp, culture, ling_drift, relig_base, relig_drift


def _pairwise_table(spec, countries, dist_std, sp, culture, ling_drift, relig_base,
                    relig_drift):
    C = spec.n_countries
    ii, jj = np.nonzero(~np.eye(C, dtype=bool))
    frames = []
    for t in range(spec.n_years):
        lang = culture + t * ling_drift
        rel = relig_base + t * relig_drift
        ling = np.exp(-2.0 * cdist(lang, lang))
        relig = np.exp(-1.5 * cdist(rel, rel))
        frames.append(pd.DataFrame({
            "c": countries[ii], "c_prime": countries[jj], "year": t,
            "sp": sp[ii, jj].astype(int), "dist_std": dist_std[ii, jj],
            "ling": np.clip(ling[ii, jj], 0, 1), "relig": np.clip(relig[ii, jj], 0, 1),
        }))
    return pd.concat(frames, ignore_index=True)


def _indicators(codes, scheme, rng):
    """Restrictiveness indicators whose median split tends to reproduce ``codes``."""
    n = codes.shape
    u_r = rng.uniform(0.02, 0.98, size=n)
    u_c = rng.uniform(0.02, 0.98, size=n)
    if scheme is Scheme.FOUR:
        hi_r = (codes == 1) | (codes == 3)
        hi_c = (codes == 2) | (codes == 3)
    elif scheme is Scheme.THREE:
        coin = rng.uniform(size=n) < 0.5
        hi_r = (codes == 2) | ((codes == 1) & coin)
        hi_c = (codes == 2) | ((codes == 1) & ~coin)
    else:
        hi_r = hi_c = codes == 1
    reg = np.where(hi_r, 0.5 + 0.5 * u_r, 0.5 * u_r)
    cont = np.where(hi_c, 0.5 + 0.5 * u_c, 0.5 * u_c)
    return reg, cont


def generate(spec=None):
    """Simulate a raw panel, the pairwise influence inputs and the true effects."""
    spec = spec or DgpSpec()
    rng = np.random.default_rng(spec.seed)
    C, T, K, P = spec.n_countries, spec.n_years, spec.K, spec.n_covariates
    cl, ol = spec.covariate_lag, spec.outcome_lag
    countries = np.array([f"C{c:02d}" for c in range(C)], dtype=object)

    pos, dist_std, sp, culture, ling_drift, relig_base, relig_drift = _world(spec, rng)
    pairwise = _pairwise_table(spec, countries, dist_std, sp, culture, ling_drift,
                               relig_base, relig_drift)

    # covariates for years -cl .. T-1
    n_cov_years = T + cl
    field_ = pos @ rng.normal(size=2) + 0.5 * np.sin(3 * pos[:, 0]) * np.cos(3 * pos[:, 1])
    region = (field_ - field_.mean()) / field_.std()
    shock = rng.normal(size=n_cov_years)
    region_load = rng.choice([-1.0, 1.0], size=P) * rng.uniform(0.5, 1.0, size=P)
    year_load = rng.normal(size=P)
    persistent = rng.normal(scale=0.5, size=(C, P))
    X = (spec.region_loading * region[:, None, None] * region_load[None, None, :]
         + spec.year_loading * shock[None, :, None] * year_load[None, None, :]
         + persistent[:, None, :]
         + rng.normal(size=(C, n_cov_years, P)))

    # treatment in year t is driven by covariates of year t - cl (index t)
    coefs = spec.treatment_scale * np.asarray(spec.treatment_coefs, dtype=float)
    Xt = X[:, :T, :].reshape(C * T, P)
    probs = mnl_probabilities(coefs, np.column_stack([np.ones(C * T), Xt]), 0).reshape(C, T, K)
    cum = probs.cumsum(axis=2)
    u = rng.uniform(size=(C, T, 1))
    latent = np.minimum((u > cum).sum(axis=2), K - 1)
    if np.any(probs.mean(axis=(0, 1)) < 0.01):
        warnings.warn("a treatment category has probability close to zero", stacklevel=2)

    reg, cont = _indicators(latent, spec.scheme, rng)
    impol = 0.5 * reg + 0.5 * cont
    analysis_years = np.arange(cl, T - ol)
    if spec.scheme is Scheme.BINARY:
        med = lower_median(impol[:, analysis_years])
        codes = (impol > med).astype(np.int64)
    else:
        med_r = lower_median(reg[:, analysis_years])
        med_c = lower_median(cont[:, analysis_years])
        codes = four_category_codes(reg, cont, med_r, med_c)
        if spec.scheme is Scheme.THREE:
            codes = np.array([0, 1, 1, 2])[codes]

    units = [(c, t) for c in countries for t in range(T)]
    graph = build_influence(validate_pairwise(pairwise), *spec.true_iiw, units=units)
    onehot = np.eye(K)[codes]  # C x T x K
    exposure = np.zeros((C, T, K))
    for t in range(T):
        exposure[:, t, :] = graph.slice(t) @ onehot[:, t, :]

    year_noise = rng.normal(scale=0.1, size=T)
    y = np.full((C, T), spec.base_outcome)
    y += spec.year_outcome_coef * shock[cl:cl + T][None, :] + year_noise[None, :]
    direct = np.asarray(spec.outcome_coefs, dtype=float)
    spill = np.asarray(spec.spillover_coefs, dtype=float)
    delta = np.asarray(spec.covariate_outcome_coefs, dtype=float)
    for t in range(ol, T):
        s = t - ol  # treatment year
        y[:, t] += direct[codes[:, s]] + exposure[:, s, :] @ spill + X[:, s, :] @ delta
    y += rng.normal(scale=spec.noise_sd, size=(C, T))

    cov_names = tuple(f"x{p + 1:02d}" for p in range(P))
    panel = PanelFrame(
        country=np.repeat(countries, T),
        time=np.tile(np.arange(T), C),
        covariates=X[:, cl:, :].reshape(C * T, P),
        reg=reg.ravel(), cont=cont.ravel(), outcome=y.ravel(),
        covariate_names=cov_names,
        impol=impol.ravel() if spec.scheme is Scheme.BINARY else None,
        treatment_scheme=spec.scheme,
    )
    return SyntheticData(spec=spec, panel=panel, pairwise=pairwise, graph=graph,
                         truth=true_effects(spec), latent_codes=latent, latent_probs=probs,
                         codes=codes, exposure=exposure)


def fixture_config(spec, panel_file="panel.csv", pairwise_file="pairwise.csv"):
    """Run configuration matching the files written by :func:`write_fixture`."""
    schema = {"id": "country", "year": "year", "reg": "reg", "cont": "cont",
              "outcome": "outcome",
              "covariates": [f"x{p + 1:02d}" for p in range(spec.n_covariates)]}
    if spec.scheme is Scheme.BINARY:
        schema["impol"] = "impol"
    return {
        "panel": {"path": panel_file, "schema": schema},
        "pairwise": {"path": pairwise_file},
        "treatment": {"scheme": spec.scheme.value},
        "lags": {"covariate": spec.covariate_lag, "outcome": spec.outcome_lag},
        "iiw": [[0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        "grid": {"per_dim": 10, "q_low": 0.05, "q_high": 0.95},
        "bootstrap": {"replicates": 200, "seed": spec.seed, "level": 0.95},
        "ridge": 0.0,
        "output": {"dir": "out"},
    }


def write_fixture(data, directory):
    """Write ``panel.csv``, ``pairwise.csv``, ``truth.json`` and a matching
    ``config.yaml`` into ``directory``."""
    import yaml

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    df = data.panel.to_frame()
    if data.panel.impol is not None:
        df["impol"] = data.panel.impol
    df.to_csv(out / "panel.csv", index=False, float_format="%.12g", lineterminator="\n")
    data.pairwise.to_csv(out / "pairwise.csv", index=False, float_format="%.12g",
                         lineterminator="\n")
    truth = {"contrasts": data.truth,
             "outcome_coefs": dict(zip(data.spec.levels, map(float, data.spec.outcome_coefs))),
             "spec": data.spec.to_mapping()}
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "config.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(fixture_config(data.spec), fh, sort_keys=False)
    return out
