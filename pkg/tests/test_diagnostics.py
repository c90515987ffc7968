import numpy as np
import pytest

from netpscore.dgp import DgpSpec
from netpscore.diagnostics import (balance_summary, balance_table, orq_normality,
                                   standardized_difference)
from netpscore.pipeline import PipelineOptions, fit_pipeline

from conftest import analysis_from_dgp


def test_constant_covariate_zero():
    x = np.column_stack([np.ones(10), np.arange(10.0)])
    d = np.arange(10) % 2 == 0
    smd = standardized_difference(x, d)
    assert smd[0] == 0.0
    assert smd[1] == pytest.approx(-1 / np.sqrt(np.var(x[d, 1], ddof=1)))


def test_small_group_nan():
    assert np.isnan(standardized_difference(np.arange(4.0), [True, False, False, False])).all()


def _state(n_countries=60, n_years=40, **kw):
    spec = DgpSpec(n_countries=n_countries, n_years=n_years, n_covariates=4, seed=11, **kw)
    return fit_pipeline(analysis_from_dgp(spec)[3], PipelineOptions(per_dim=3))


def test_randomized_treatment_balanced():
    table = balance_table(_state(100, 60, treatment_scale=0.0))
    within = table[table.stratum != "raw"].dropna(subset=["smd"])
    assert np.median(within.smd.abs()) < 0.1


def test_confounded_within_smaller():
    state = _state(treatment_scale=4.0)
    summary = balance_summary(balance_table(state, n_phi_bins=5, n_lambda_bins=1))
    assert np.median(summary["within"]) < np.median(summary["raw"])


def test_orq_normality():
    g = np.random.default_rng(0).normal(size=(500, 2))
    df = orq_normality(g, ("a", "b"))
    assert list(df.level) == ["a", "b"]
    assert (df.ks < 0.1).all() and (df.pearson_per_df > 0).all()
