import numpy as np
import pytest
from scipy import stats
from scipy.integrate import dblquad

from netpscore.errors import DataError, RankError
from netpscore.mvlr import (fit_mvlr, lambda_density, ols, predict_actual_lambda,
                            stable_cholesky)
from netpscore.panel import LEVELS, Scheme, TreatmentAssignment


def assignment(codes, K=4):
    levels = LEVELS[{4: Scheme.FOUR, 3: Scheme.THREE, 2: Scheme.BINARY}[K]]
    return TreatmentAssignment(np.asarray(codes), levels, levels[0])


def synthetic(n, K, rng, noise=True):
    x = rng.normal(size=(n, 2))
    z = assignment(rng.integers(0, K, n), K)
    B = rng.normal(size=(1 + 2 + K - 1, K))
    X = np.column_stack([np.ones(n), x, np.eye(K)[z.codes][:, 1:]])
    A = rng.normal(size=(K, K))
    Sigma = A @ A.T / K + 0.3 * np.eye(K)
    E = rng.multivariate_normal(np.zeros(K), Sigma, size=n) if noise else 0.0
    return X @ B + E, z, x, B, Sigma


def test_noiseless_exact(rng):
    g, z, x, B, _ = synthetic(60, 4, rng, noise=False)
    fit = fit_mvlr(g, z, x)
    np.testing.assert_allclose(fit.coef, B, atol=1e-10)
    assert np.linalg.norm(fit.sigma) < 1e-8


def test_intercept_only_closed_form(rng):
    g = rng.normal(size=(30, 2))
    coef = ols(np.ones((30, 1)), g, ("(Intercept)",))
    np.testing.assert_allclose(coef[0], g.mean(axis=0))
    R = g - coef[0]
    np.testing.assert_allclose(R.T @ R / (30 - 1), np.cov(g.T, ddof=1))


def test_category_means_without_covariates(rng):
    # with only the treatment dummies the fitted means are the group means
    codes = np.repeat([0, 1], [12, 18])
    g = rng.normal(size=(30, 2))
    fit = fit_mvlr(g, assignment(codes, 2), np.empty((30, 0)), regressor_names=())
    np.testing.assert_allclose(fit.mean(0, np.empty((1, 0)))[0], g[:12].mean(axis=0))
    np.testing.assert_allclose(fit.mean(1, np.empty((1, 0)))[0], g[12:].mean(axis=0))


def test_recovers_coefficients(rng):
    g, z, x, B, _ = synthetic(5000, 4, rng)
    fit = fit_mvlr(g, z, x)
    se = np.sqrt(np.outer(np.diag(fit.xtx_inv), np.diag(fit.sigma)))
    assert np.all(np.abs(fit.coef - B) < 4 * se)


def test_residual_orthogonality_and_symmetry(rng):
    g, z, x, _, _ = synthetic(300, 3, rng)
    fit = fit_mvlr(g, z, x)
    X = fit.design(z.codes, x)
    R = g - X @ fit.coef
    assert np.abs(X.T @ R).max() < 1e-8 * np.abs(X.T @ g).max()
    np.testing.assert_array_equal(fit.sigma, fit.sigma.T)
    np.linalg.cholesky(fit.sigma + 1e-10 * np.eye(3))
    assert np.linalg.eigvalsh(fit.sigma).min() >= -1e-10


def test_rank_error_names_columns(rng):
    x = rng.normal(size=(40, 1))
    z = assignment(rng.integers(0, 2, 40), 2)
    with pytest.raises(RankError, match="dup"):
        fit_mvlr(rng.normal(size=(40, 2)), z, np.column_stack([x, 2 * x]),
                 regressor_names=("x", "dup"))


def test_insufficient_data(rng):
    with pytest.raises(DataError):
        fit_mvlr(rng.normal(size=(4, 2)), assignment([0, 1, 0, 1], 2), rng.normal(size=(4, 1)))


def test_mode_height_identity(rng):
    g, z, x, _, _ = synthetic(200, 4, rng)
    fit = fit_mvlr(g, z, x)
    mu = fit.mean("HL", x[0])
    log_det = 2 * np.log(np.diag(fit.chol)).sum()
    expected = (2 * np.pi) ** -2 * np.exp(-0.5 * log_det)
    assert lambda_density(fit, mu[0], "HL", x[0]) == pytest.approx(expected, rel=1e-10)


def test_matches_scipy_and_symmetry(rng):
    g, z, x, _, _ = synthetic(200, 2, rng)
    fit = fit_mvlr(g, z, x)
    mu = fit.mean(1, x[3])[0]
    d = rng.normal(size=2)
    ref = stats.multivariate_normal(mu, fit.sigma)
    assert lambda_density(fit, mu + d, 1, x[3]) == pytest.approx(ref.pdf(mu + d), rel=1e-10)
    assert lambda_density(fit, mu + d, 1, x[3]) == pytest.approx(
        lambda_density(fit, mu - d, 1, x[3]), rel=1e-12)


def test_diagonal_factorizes(rng):
    g, z, x, _, _ = synthetic(100, 2, rng)
    fit = fit_mvlr(g, z, x)
    sigma = np.diag([0.5, 2.0])
    object.__setattr__(fit, "sigma", sigma)
    object.__setattr__(fit, "chol", np.linalg.cholesky(sigma))
    mu = fit.mean(0, x[0])[0]
    pt = mu + [0.3, -1.1]
    prod = stats.norm.pdf(pt[0], mu[0], np.sqrt(0.5)) * stats.norm.pdf(pt[1], mu[1], np.sqrt(2))
    assert lambda_density(fit, pt, 0, x[0]) == pytest.approx(prod, rel=1e-12)


def test_integrates_to_one(rng):
    g, z, x, _, _ = synthetic(150, 2, rng)
    fit = fit_mvlr(g, z, x)
    mu = fit.mean(0, x[0])[0]
    s = np.sqrt(np.diag(fit.sigma))
    val, _ = dblquad(lambda b, a: lambda_density(fit, np.array([a, b]), 0, x[0]),
                     mu[0] - 6 * s[0], mu[0] + 6 * s[0], mu[1] - 6 * s[1], mu[1] + 6 * s[1],
                     epsabs=1e-6)
    assert val == pytest.approx(1.0, abs=0.01)


def test_actual_lambda_brute_force(rng):
    g, z, x, _, _ = synthetic(10, 2, rng)
    g = g + rng.normal(size=g.shape)
    fit = fit_mvlr(g, z, x)
    lam = predict_actual_lambda(fit, g, z.codes, x)
    assert np.all(lam > 0)
    for i in range(10):
        mu = fit.coef.T @ np.r_[1.0, x[i], z.codes[i] == 1]
        assert lam[i] == pytest.approx(stats.multivariate_normal(mu, fit.sigma).pdf(g[i]),
                                       rel=1e-10)
        assert lam[i] <= lambda_density(fit, mu, z.codes[i], x[i]) * (1 + 1e-12)


def test_stable_cholesky_jitter():
    singular = np.ones((2, 2))
    L, eps = stable_cholesky(singular)
    assert eps > 0
    np.testing.assert_allclose(L @ L.T, singular + eps * np.eye(2))


def test_tables(rng):
    g, z, x, _, _ = synthetic(200, 4, rng)
    fit = fit_mvlr(g, z, x, regressor_names=("a", "b"))
    assert list(fit.to_frame()["term"]) == ["(Intercept)", "a", "b", "Z_HL", "Z_LH", "Z_HH"]
    omni = fit.omnibus()
    assert list(omni["term"]) == ["(Intercept)", "a", "b", "Z"]
    assert omni.loc[omni.term == "Z", "df"].item() == 12
