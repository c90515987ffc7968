import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.special import ndtri

from netpscore.errors import DegenerateColumnError
from netpscore.transform import orq_apply, orq_columns, orq_fit_transform, orq_inverse

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_three_values():
    _, out = orq_fit_transform([3.0, 1.0, 2.0])
    np.testing.assert_allclose(out, [0.6744897501960817, -0.6744897501960817, 0.0], atol=1e-15)


def test_odd_median_is_zero():
    _, out = orq_fit_transform([7.0, -1.0, 4.0, 2.5, 9.0])
    assert out[2] == 0.0


def test_ties_mid_rank():
    _, out = orq_fit_transform([5.0, 5.0, 1.0])
    np.testing.assert_array_equal(out, ndtri(np.array([2.5, 2.5, 1.0]) / 4))


def test_constant_column():
    with pytest.raises(DegenerateColumnError):
        orq_fit_transform([2.0, 2.0, 2.0])


def test_apply_training_points_and_clamp():
    x = np.array([0.3, 1.2, -0.7, 2.2, 0.9])
    m, out = orq_fit_transform(x)
    np.testing.assert_array_equal(orq_apply(m, x), out)
    assert orq_apply(m, -10.0) == ndtri(1 / 6)
    assert orq_apply(m, 10.0) == ndtri(5 / 6)
    # midway between the 2nd and 3rd smallest -> rank 2.5
    assert orq_apply(m, 0.5 * (0.3 + 0.9)) == pytest.approx(ndtri(2.5 / 6), abs=1e-15)


def test_inverse():
    x = np.array([0.3, 1.2, -0.7, 2.2, 0.9])
    m, out = orq_fit_transform(x)
    np.testing.assert_array_equal(orq_inverse(m, out), x)
    assert orq_inverse(m, 0.0) == np.median(x)
    assert orq_inverse(m, -8.0) == x.min()
    assert orq_inverse(m, 8.0) == x.max()


def test_ks_normality():
    x = np.random.default_rng(7).exponential(size=1000)
    _, out = orq_fit_transform(x)
    assert stats.kstest(out, "norm").statistic < 0.05


@given(st.lists(finite, min_size=2, max_size=60, unique=True))
def test_monotone_rank_preserving_round_trip(values):
    x = np.array(values)
    m, out = orq_fit_transform(x)
    np.testing.assert_array_equal(np.argsort(out), np.argsort(x))
    np.testing.assert_array_equal(orq_inverse(m, out), x)
    probe = np.sort(np.concatenate([x, np.linspace(x.min() - 1, x.max() + 1, 25)]))
    assert np.all(np.diff(orq_apply(m, probe)) >= 0)


def test_columns():
    G = np.random.default_rng(1).uniform(size=(20, 3))
    maps, G_star = orq_columns(G)
    assert len(maps) == 3 and G_star.shape == (20, 3)
    with pytest.raises(DegenerateColumnError, match="column 1"):
        orq_columns(np.column_stack([G[:, 0], np.zeros(20)]))
