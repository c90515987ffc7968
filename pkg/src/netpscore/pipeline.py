"""Estimation pipeline: propensity models, outcome model and grid on one sample."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConfigError
from .exposure import build_ntem
from .grid import DEFAULT_CAP, build_grid
from .influence import unit_centrality
from .mnl import fit_mnl
from .mvlr import fit_mvlr, predict_actual_lambda
from .outcome import fit_outcome
from .panel import TreatmentAssignment
from .transform import orq_columns

log = logging.getLogger(__name__)

WEIGHTINGS = ("baseline", "symmetric")


@dataclass(frozen=True)
class PipelineOptions:
    per_dim: int = 10
    q_low: float = 0.05
    q_high: float = 0.95
    grid_cap: int = DEFAULT_CAP
    ridge: float = 0.0
    weighting: str = "baseline"
    threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"weighting must be one of {WEIGHTINGS}")
        if self.per_dim < 2:
            raise ConfigError("grid per_dim must be at least 2")
        if not 0 < self.q_low < self.q_high < 1:
            raise ConfigError("grid quantiles need 0 < q_low < q_high < 1")
        if self.ridge < 0:
            raise ConfigError("ridge must be non-negative")


@dataclass(frozen=True, eq=False)
class AnalysisData:
    """Everything the estimators need, one row per analysis unit.

    Exposure rows are computed once on the full network and travel with
    their unit when the sample is resampled.
    """

    y: np.ndarray
    codes: np.ndarray
    levels: tuple
    reference: str
    x: np.ndarray
    centrality: np.ndarray
    ntem: np.ndarray
    time: np.ndarray
    country: np.ndarray
    covariate_names: tuple = ()
    iiw: tuple = (0.0, 0.0)

    @property
    def n(self):
        return len(self.y)

    @property
    def K(self):
        return len(self.levels)

    @property
    def zero_exposure(self):
        return not np.any(self.ntem)

    @property
    def assignment(self):
        return TreatmentAssignment(self.codes, self.levels, self.reference)

    def take(self, rows):
        rows = np.asarray(rows)
        return replace(self, y=self.y[rows], codes=self.codes[rows], x=self.x[rows],
                       centrality=self.centrality[rows], ntem=self.ntem[rows],
                       time=self.time[rows], country=self.country[rows])


def prepare_analysis(panel, assignment, graph):
    """Assemble :class:`AnalysisData` from a lag-aligned panel, its treatment
    categories and the influence graph."""
    ntem = build_ntem(graph, assignment, panel)
    return AnalysisData(
        y=panel.outcome.copy(), codes=assignment.codes.copy(), levels=tuple(assignment.levels),
        reference=assignment.reference, x=panel.covariates.copy(),
        centrality=unit_centrality(graph, panel.country, panel.time), ntem=ntem.G,
        time=panel.time.copy(), country=panel.country.copy(),
        covariate_names=tuple(panel.covariate_names), iiw=(graph.alpha, graph.beta))


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    data: AnalysisData
    options: PipelineOptions
    mnl: object
    phi: np.ndarray  # N x K individual propensity for every level
    outcome: object
    orq_maps: list | None = None
    g_star: np.ndarray | None = None
    x_g: np.ndarray | None = None
    mvlr: object | None = None
    lambda_hat: np.ndarray | None = None
    grid: object | None = None
    extra: dict = field(default_factory=dict)

    @property
    def levels(self):
        return self.data.levels

    @property
    def has_exposure(self):
        return self.mvlr is not None

    @property
    def phi_actual(self):
        return self.phi[np.arange(self.data.n), self.data.codes]

    def category_means(self):
        """(K, N, K) fitted exposure means of every unit under every category."""
        return np.stack([self.mvlr.mean(k, self.x_g) for k in range(self.data.K)])

    @cached_property
    def grid_moments(self):
        """Per-unit density sums and cross products over the grid, see
        :func:`netpscore.kernels.density_gram`."""
        return kernels.density_gram(self.grid.points, self.category_means(), self.mvlr.chol,
                                    threads=self.options.threads, backend=self.options.backend)

    def grid_lambda(self, z):
        """(N, G) neighborhood density of every unit at every grid point under ``z``."""
        mu = self.mvlr.mean(z, self.x_g)
        out = np.empty((self.data.n, len(self.grid)))
        for i in range(self.data.n):
            out[i] = np.exp(self.mvlr.log_density(self.grid.points, mu[i]))
        return out


def fit_pipeline(data, options=None):
    options = options or PipelineOptions()
    z = data.assignment
    mnl = fit_mnl(data.x, z, ridge=options.ridge, covariate_names=data.covariate_names)
    phi = mnl.predict_proba(data.x)
    phi_actual = phi[np.arange(data.n), data.codes]
    if data.zero_exposure:
        outcome = fit_outcome(data.y, z, None, phi_actual, None, data.time)
        return FittedPipeline(data, options, mnl, phi, outcome)
    maps, g_star = orq_columns(data.ntem)
    x_g = np.column_stack([data.x, data.centrality])
    mvlr = fit_mvlr(g_star, z, x_g,
                    regressor_names=tuple(data.covariate_names) + ("vertex_centrality",))
    lambda_hat = predict_actual_lambda(mvlr, g_star, data.codes, x_g)
    outcome = fit_outcome(data.y, z, g_star, phi_actual, lambda_hat, data.time)
    grid = build_grid(mvlr, options.per_dim, options.q_low, options.q_high, options.grid_cap)
    return FittedPipeline(data, options, mnl, phi, outcome, maps, g_star, x_g, mvlr,
                          lambda_hat, grid)
