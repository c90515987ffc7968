"""YAML run configuration.

Relative paths are resolved against the directory of the config file.
Example::

    panel:
      path: panel.csv
      schema: {id: country, year: year, reg: reg, cont: cont,
               outcome: outcome, covariates: [x01, x02]}
    pairwise: {path: pairwise.csv, standardize_dist: false}
    treatment: {scheme: FOUR}
    lags: {covariate: 1, outcome: 1}
    iiw: [[0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
    grid: {per_dim: 10, q_low: 0.05, q_high: 0.95}
    bootstrap: {replicates: 200, seed: 0, level: 0.95, cluster: false}
    ridge: 0.0
    weighting: baseline
    output: {dir: out}
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .effects import DEFAULT_IIW
from .errors import ConfigError
from .grid import DEFAULT_CAP
from .influence import check_iiw
from .panel import LEVELS, Schema, Scheme
from .pipeline import PipelineOptions

TOP_KEYS = {"panel", "pairwise", "treatment", "lags", "iiw", "grid", "bootstrap", "ridge",
            "weighting", "contrasts", "output"}


def _section(raw, key, allowed):
    sec = raw.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be a mapping")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{key}': {sorted(unknown)}")
    return sec


@dataclass
class RunConfig:
    panel_path: Path
    schema: Schema
    pairwise_path: Path | None
    standardize_dist: bool = False
    scheme: Scheme = Scheme.FOUR
    impol_weights: tuple | None = None
    covariate_lag: int = 1
    outcome_lag: int = 1
    append_outcome: bool = True
    iiw: tuple = DEFAULT_IIW
    per_dim: int = 10
    q_low: float = 0.05
    q_high: float = 0.95
    grid_cap: int = DEFAULT_CAP
    replicates: int = 200
    seed: int = 0
    level: float = 0.95
    cluster: bool = False
    ridge: float = 0.0
    weighting: str = "baseline"
    contrasts: list | None = None
    output_dir: Path = Path("out")
    source: Path | None = None
    sha256: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def levels(self):
        return LEVELS[self.scheme]

    def pipeline_options(self, threads=1):
        return PipelineOptions(per_dim=self.per_dim, q_low=self.q_low, q_high=self.q_high,
                               grid_cap=self.grid_cap, ridge=self.ridge,
                               weighting=self.weighting, threads=threads)


def load_config(path, check_files=True):
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    cfg = parse_config(raw, base=path.parent, check_files=check_files)
    cfg.source = path
    cfg.sha256 = hashlib.sha256(text).hexdigest()
    return cfg


def parse_config(raw, base=Path("."), check_files=True):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = Path(base)

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    panel = _section(raw, "panel", {"path", "schema"})
    if "path" not in panel:
        raise ConfigError("panel.path is required")
    try:
        schema = Schema.from_mapping(panel.get("schema") or {})
    except TypeError as exc:
        raise ConfigError(f"bad panel.schema: {exc}") from None
    pairwise = _section(raw, "pairwise", {"path", "standardize_dist"})
    treatment = _section(raw, "treatment", {"scheme", "impol_weights"})
    lags = _section(raw, "lags", {"covariate", "outcome", "append_outcome"})
    grid = _section(raw, "grid", {"per_dim", "q_low", "q_high", "cap"})
    boot = _section(raw, "bootstrap", {"replicates", "seed", "level", "cluster"})
    output = _section(raw, "output", {"dir"})

    try:
        scheme = Scheme(str(treatment.get("scheme", "FOUR")).upper())
    except ValueError:
        raise ConfigError(f"unknown treatment scheme {treatment.get('scheme')!r}") from None
    impol_weights = treatment.get("impol_weights")
    if impol_weights is not None:
        if len(impol_weights) != 2:
            raise ConfigError("impol_weights needs two entries (reg, cont)")
        impol_weights = tuple(float(w) for w in impol_weights)

    iiw = raw.get("iiw", [list(p) for p in DEFAULT_IIW])
    try:
        iiw = tuple((float(a), float(b)) for a, b in iiw)
    except (TypeError, ValueError):
        raise ConfigError("iiw must be a list of [alpha, beta] pairs") from None
    if not iiw:
        raise ConfigError("iiw list is empty")
    for a, b in iiw:
        check_iiw(a, b)
    needs_pairwise = any(a or b for a, b in iiw)
    if needs_pairwise and "path" not in pairwise:
        raise ConfigError("pairwise.path is required for non-zero influence weights")

    def as_int(sec, key, default, name):
        v = sec.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name} must be an integer")
        return v

    cfg = RunConfig(
        panel_path=resolve(panel["path"]),
        schema=schema,
        pairwise_path=resolve(pairwise["path"]) if "path" in pairwise else None,
        standardize_dist=bool(pairwise.get("standardize_dist", False)),
        scheme=scheme,
        impol_weights=impol_weights,
        covariate_lag=as_int(lags, "covariate", 1, "lags.covariate"),
        outcome_lag=as_int(lags, "outcome", 1, "lags.outcome"),
        append_outcome=bool(lags.get("append_outcome", True)),
        iiw=iiw,
        per_dim=as_int(grid, "per_dim", 10, "grid.per_dim"),
        q_low=float(grid.get("q_low", 0.05)),
        q_high=float(grid.get("q_high", 0.95)),
        grid_cap=as_int(grid, "cap", DEFAULT_CAP, "grid.cap"),
        replicates=as_int(boot, "replicates", 200, "bootstrap.replicates"),
        seed=as_int(boot, "seed", 0, "bootstrap.seed"),
        level=float(boot.get("level", 0.95)),
        cluster=bool(boot.get("cluster", False)),
        ridge=float(raw.get("ridge", 0.0)),
        weighting=str(raw.get("weighting", "baseline")),
        contrasts=raw.get("contrasts"),
        output_dir=resolve(output.get("dir", "out")),
        raw=raw,
    )
    validate(cfg, check_files)
    return cfg


def validate(cfg, check_files=True):
    if cfg.replicates < 2:
        raise ConfigError(f"bootstrap.replicates must be at least 2, got {cfg.replicates}")
    if not 0 < cfg.level < 1:
        raise ConfigError("bootstrap.level must be in (0, 1)")
    if cfg.seed < 0:
        raise ConfigError("bootstrap.seed must be non-negative")
    if cfg.covariate_lag < 0 or cfg.outcome_lag < 0:
        raise ConfigError("lags must be non-negative")
    if not cfg.schema.covariates:
        raise ConfigError("panel.schema.covariates must list at least one column")
    if cfg.scheme is Scheme.BINARY and cfg.schema.impol is None and cfg.impol_weights is None:
        raise ConfigError("BINARY scheme needs panel.schema.impol or treatment.impol_weights")
    cfg.pipeline_options()  # grid, ridge and weighting checks
    if cfg.contrasts is not None:
        pairs = []
        for item in cfg.contrasts:
            if len(item) != 2 or item[0] == item[1]:
                raise ConfigError(f"bad contrast {item!r}")
            for lv in item:
                if lv not in cfg.levels:
                    raise ConfigError(f"unknown category {lv!r} in contrasts")
            pairs.append((str(item[0]), str(item[1])))
        cfg.contrasts = pairs
    if check_files:
        for p in (cfg.panel_path, cfg.pairwise_path):
            if p is not None and not p.is_file():
                raise ConfigError(f"input file not found: {p}")
    return cfg
