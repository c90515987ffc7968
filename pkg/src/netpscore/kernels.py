"""Hot loops, backed by a compiled extension when it is importable.

Set ``NETPSCORE_KERNEL=python`` to force the numpy implementation.
"""
import os

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels_py

try:
    if os.environ.get("NETPSCORE_KERNEL", "").lower() == "python":
        raise ImportError("compiled kernels disabled by NETPSCORE_KERNEL")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
BACKENDS = ("cython", "python") if _compiled is not None else ("python",)


def _impl(backend):
    backend = backend or BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled.density_gram_white
    if backend == "python":
        return _kernels_py.density_gram_white
    raise ValueError(f"unknown kernel backend {backend!r}")


def density_gram(grid, means, chol, threads=1, backend=None):
    """Per-unit sums of Gaussian densities over a grid and their cross products.

    Parameters
    ----------
    grid : array (G, K)
        Evaluation points.
    means : array (C, N, K)
        Mean of unit ``i`` under category ``c``.
    chol : array (K, K)
        Lower Cholesky factor of the shared covariance.

    Returns
    -------
    sums : array (C, N)
        ``sum_g f(g; means[c, i])``.
    gram : array (C, C, N)
        ``sum_g f(g; means[a, i]) * f(g; means[b, i])``.
    """
    grid = np.ascontiguousarray(grid, dtype=float)
    means = np.asarray(means, dtype=float)
    K = grid.shape[1]
    L = np.asarray(chol, dtype=float)
    # whitening: L^{-1} (g - mu) = L^{-1} g - L^{-1} mu
    grid_w = np.ascontiguousarray(solve_triangular(L, grid.T, lower=True).T)
    means_w = solve_triangular(L, means.reshape(-1, K).T, lower=True).T
    means_w = np.ascontiguousarray(means_w.reshape(means.shape))
    log_norm = -0.5 * K * np.log(2 * np.pi) - np.log(np.diag(L)).sum()
    return _impl(backend)(grid_w, means_w, float(log_norm), int(threads))
