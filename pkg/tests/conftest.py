import numpy as np
import pytest

from netpscore.dgp import DgpSpec, generate
from netpscore.influence import build_influence, validate_pairwise
from netpscore.panel import categorize_treatment, lag_align
from netpscore.pipeline import PipelineOptions, fit_pipeline, prepare_analysis

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def analysis_from_dgp(spec, alpha=0.5, beta=0.5, lags=None):
    """Lag-aligned analysis data for a synthetic panel."""
    sim = generate(spec)
    cl, ol = lags or (spec.covariate_lag, spec.outcome_lag)
    panel = lag_align(sim.panel, cl, ol)
    assignment = categorize_treatment(panel, spec.scheme)
    raw = validate_pairwise(sim.pairwise)
    graph = build_influence(raw, alpha, beta, units=list(zip(panel.country, panel.time)))
    return sim, panel, assignment, prepare_analysis(panel, assignment, graph)


@pytest.fixture(scope="session")
def small_spec():
    return DgpSpec(n_countries=10, n_years=12, n_covariates=3, seed=3)


@pytest.fixture(scope="session")
def small_analysis(small_spec):
    return analysis_from_dgp(small_spec)


@pytest.fixture(scope="session")
def small_state(small_analysis):
    return fit_pipeline(small_analysis[3], PipelineOptions(per_dim=4))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
