import numpy as np
import pytest

from netpscore.errors import DataError, DomainError, RankError
from netpscore.outcome import fit_outcome, impute_potential_outcome
from netpscore.panel import LEVELS, Scheme, TreatmentAssignment

FOUR = LEVELS[Scheme.FOUR]


def design_inputs(n, rng):
    z = TreatmentAssignment(rng.integers(0, 4, n), FOUR, "LL")
    g = rng.normal(size=(n, 4))
    phi = rng.uniform(0.1, 0.6, n)
    lam = rng.uniform(0.0, 0.2, n)
    time = rng.integers(0, 5, n)
    return z, g, phi, lam, time


def truth_vector(rng):
    # intercept, 3 dummies, 4 G, phi, lambda, 4 year dummies
    return rng.normal(size=1 + 3 + 4 + 1 + 1 + 4)


def test_exact_recovery(rng):
    z, g, phi, lam, time = design_inputs(80, rng)
    theta = truth_vector(rng)
    fit0 = fit_outcome(rng.normal(size=80), z, g, phi, lam, time)
    y = fit0.design(z.codes, g, phi, lam, time) @ theta
    fit = fit_outcome(y, z, g, phi, lam, time)
    np.testing.assert_allclose(fit.coef, theta, atol=1e-8)
    assert fit.residual_variance >= 0


def test_constant_outcome(rng):
    z, g, phi, lam, time = design_inputs(50, rng)
    fit = fit_outcome(np.full(50, 3.5), z, g, phi, lam, time)
    assert fit.coefficient("(Intercept)") == pytest.approx(3.5)
    np.testing.assert_allclose(fit.coef[1:], 0, atol=1e-10)


def test_recovers_within_standard_errors(rng):
    z, g, phi, lam, time = design_inputs(5000, rng)
    theta = truth_vector(rng)
    fit0 = fit_outcome(np.zeros(5000) + rng.normal(size=5000), z, g, phi, lam, time)
    y = fit0.design(z.codes, g, phi, lam, time) @ theta + rng.normal(size=5000)
    fit = fit_outcome(y, z, g, phi, lam, time)
    se = np.sqrt(np.diag(fit.cov))
    assert np.all(np.abs(fit.coef - theta) < 4 * se)


def test_names_and_mean(rng):
    z, g, phi, lam, time = design_inputs(60, rng)
    y = rng.normal(size=60)
    fit = fit_outcome(y, z, g, phi, lam, time)
    assert fit.names[:4] == ("(Intercept)", "Z_HL", "Z_LH", "Z_HH")
    assert fit.names[4:10] == ("G_LL", "G_HL", "G_LH", "G_HH", "phi", "lambda")
    assert fit.names[10:] == ("T_1", "T_2", "T_3", "T_4")
    assert fit.fitted.mean() == pytest.approx(y.mean(), abs=1e-12)


def test_no_exposure_terms(rng):
    z, _, phi, _, time = design_inputs(40, rng)
    fit = fit_outcome(rng.normal(size=40), z, None, phi, None, time)
    assert "lambda" not in fit.names and "G_LL" not in fit.names


def test_single_year(rng):
    z, g, phi, lam, _ = design_inputs(30, rng)
    with pytest.raises(DataError):
        fit_outcome(rng.normal(size=30), z, g, phi, lam, np.zeros(30, dtype=int))


def test_rank_deficiency(rng):
    z, g, phi, lam, time = design_inputs(40, rng)
    with pytest.raises(RankError, match="lambda"):
        fit_outcome(rng.normal(size=40), z, g, phi, phi * 2, time)


def test_imputation(rng):
    z, g, phi, lam, time = design_inputs(70, rng)
    fit = fit_outcome(rng.normal(size=70), z, g, phi, lam, time)
    i = 11
    observed = impute_potential_outcome(fit, int(z.codes[i]), g[i], phi[i], lam[i], time[i])
    assert observed == pytest.approx(fit.fitted[i], abs=1e-12)
    # hand-computed dot product
    c = dict(zip(fit.names, fit.coef))
    t = int(time[i])
    hand = (c["(Intercept)"] + c["Z_LH"] + g[i] @ [c["G_LL"], c["G_HL"], c["G_LH"], c["G_HH"]]
            + c["phi"] * 0.3 + c["lambda"] * 0.05 + (c[f"T_{t}"] if t else 0.0))
    assert impute_potential_outcome(fit, "LH", g[i], 0.3, 0.05, t) == pytest.approx(hand, abs=1e-12)
    # differences depend only on the exposure and density changes
    d1 = (impute_potential_outcome(fit, "HH", g[0] + 1, 0.2, 0.1, 2)
          - impute_potential_outcome(fit, "HH", g[0], 0.2, 0.05, 2))
    d2 = (impute_potential_outcome(fit, "HH", g[5] + 1, 0.2, 0.1, 4)
          - impute_potential_outcome(fit, "HH", g[5], 0.2, 0.05, 4))
    assert d1 == pytest.approx(d2, abs=1e-12)
    with pytest.raises(DomainError):
        impute_potential_outcome(fit, "HH", g[0], 0.2, 0.1, 99)


def test_reference_invariance(rng):
    z, g, phi, lam, time = design_inputs(90, rng)
    y = rng.normal(size=90)
    a = fit_outcome(y, z, g, phi, lam, time)
    z2 = TreatmentAssignment(z.codes, FOUR, "HH")
    b = fit_outcome(y, z2, g, phi, lam, time)
    assert not np.allclose(a.coef[:4], b.coef[:4])
    for k in range(4):
        assert impute_potential_outcome(a, k, g[0], 0.3, 0.1, 3) == pytest.approx(
            impute_potential_outcome(b, k, g[0], 0.3, 0.1, 3), abs=1e-10)


def test_equal_coefficients_equal_imputations(rng):
    z, g, phi, lam, time = design_inputs(60, rng)
    theta = truth_vector(rng)
    theta[2] = theta[3]  # Z_LH == Z_HH
    fit0 = fit_outcome(rng.normal(size=60), z, g, phi, lam, time)
    fit = fit_outcome(fit0.design(z.codes, g, phi, lam, time) @ theta, z, g, phi, lam, time)
    assert impute_potential_outcome(fit, "LH", g[1], 0.4, 0.1, 1) == pytest.approx(
        impute_potential_outcome(fit, "HH", g[1], 0.4, 0.1, 1), abs=1e-8)
