import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from netpscore import kernels


def problem(seed, n_units=7, n_grid=30, K=3, C=3):
    rng = np.random.default_rng(seed)
    grid = rng.normal(size=(n_grid, K))
    means = rng.normal(scale=0.7, size=(C, n_units, K))
    A = rng.normal(size=(K, K))
    chol = np.linalg.cholesky(A @ A.T + 0.5 * np.eye(K))
    return grid, means, chol


def brute(grid, means, chol):
    cov = chol @ chol.T
    C, N, _ = means.shape
    dens = np.array([[stats.multivariate_normal(means[c, i], cov).pdf(grid)
                      for i in range(N)] for c in range(C)])  # C x N x G
    sums = dens.sum(axis=2)
    gram = np.einsum("anj,bnj->abn", dens, dens)
    return sums, gram


@pytest.mark.parametrize("backend", kernels.BACKENDS)
def test_against_brute_force(backend):
    grid, means, chol = problem(0)
    sums, gram = kernels.density_gram(grid, means, chol, backend=backend)
    b_sums, b_gram = brute(grid, means, chol)
    np.testing.assert_allclose(sums, b_sums, rtol=1e-12)
    np.testing.assert_allclose(gram, b_gram, rtol=1e-12)
    np.testing.assert_array_equal(gram, gram.transpose(1, 0, 2))


@pytest.mark.skipif(len(kernels.BACKENDS) < 2, reason="compiled kernels not built")
@given(st.integers(0, 10_000), st.integers(1, 12), st.integers(1, 40), st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_backends_agree(seed, n_units, n_grid, K):
    grid, means, chol = problem(seed, n_units, n_grid, K, C=K)
    a = kernels.density_gram(grid, means, chol, backend="cython")
    b = kernels.density_gram(grid, means, chol, backend="python")
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-300)


@pytest.mark.skipif(len(kernels.BACKENDS) < 2, reason="compiled kernels not built")
def test_threads_identical():
    grid, means, chol = problem(3, n_units=50, n_grid=200, K=4, C=4)
    one = kernels.density_gram(grid, means, chol, threads=1, backend="cython")
    four = kernels.density_gram(grid, means, chol, threads=4, backend="cython")
    for x, y in zip(one, four):
        np.testing.assert_array_equal(x, y)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.density_gram(*problem(0), backend="fortran")


def test_default_backend_reported():
    assert kernels.BACKEND in kernels.BACKENDS
