from dataclasses import replace

import numpy as np
import pytest

from netpscore.errors import ConfigError, DegenerateColumnError
from netpscore.pipeline import PipelineOptions, fit_pipeline


@pytest.mark.parametrize("kw", [{"weighting": "x"}, {"per_dim": 1}, {"q_low": 0.0},
                                {"ridge": -1.0}])
def test_options_validation(kw):
    with pytest.raises(ConfigError):
        PipelineOptions(**kw)


def test_full_fit(small_state):
    st = small_state
    d = st.data
    assert st.has_exposure
    assert st.phi.shape == (d.n, 4)
    np.testing.assert_allclose(st.phi.sum(axis=1), 1.0)
    assert st.x_g.shape[1] == d.x.shape[1] + 1
    np.testing.assert_array_equal(st.x_g[:, -1], d.centrality)
    np.testing.assert_allclose(d.ntem.sum(axis=1), d.centrality, atol=1e-12)
    assert len(st.grid) == 4**4
    assert np.all(st.lambda_hat > 0)
    assert st.category_means().shape == (4, d.n, 4)


def test_take_keeps_exposure_rows(small_analysis):
    data = small_analysis[3]
    rows = np.array([5, 5, 0, 9])
    sub = data.take(rows)
    np.testing.assert_array_equal(sub.ntem, data.ntem[rows])
    np.testing.assert_array_equal(sub.country, data.country[rows])
    assert sub.iiw == data.iiw


def test_zero_exposure_branch(small_analysis):
    data = small_analysis[3]
    zero = replace(data, ntem=np.zeros_like(data.ntem), centrality=np.zeros(data.n))
    st = fit_pipeline(zero)
    assert not st.has_exposure and st.grid is None
    assert "lambda" not in st.outcome.names


def test_degenerate_exposure_column(small_analysis):
    data = small_analysis[3]
    ntem = data.ntem.copy()
    ntem[:, 2] = 1.0
    with pytest.raises(DegenerateColumnError):
        fit_pipeline(replace(data, ntem=ntem))


def test_python_backend_same_estimates(small_analysis):
    from netpscore import kernels
    from netpscore.effects import point_estimates

    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    data = small_analysis[3]
    contrasts = [("HL", "LL"), ("HH", "LH")]
    a = point_estimates(fit_pipeline(data, PipelineOptions(per_dim=4, backend="cython")),
                        contrasts)
    b = point_estimates(fit_pipeline(data, PipelineOptions(per_dim=4, backend="python")),
                        contrasts)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)
