"""Pure-numpy version of the compiled grid-density accumulation."""
import numpy as np

_CHUNK_ELEMENTS = 4_000_000


def density_gram_white(grid_w, means_w, log_norm, threads=1):
    grid_w = np.asarray(grid_w, dtype=float)
    means_w = np.asarray(means_w, dtype=float)
    G, K = grid_w.shape
    C, N, _ = means_w.shape
    sums = np.zeros((C, N))
    gram = np.zeros((C, C, N))
    step = max(1, _CHUNK_ELEMENTS // max(1, C * G * K))
    for lo in range(0, N, step):
        hi = min(N, lo + step)
        d = grid_w[None, None, :, :] - means_w[:, lo:hi, None, :]
        lam = np.exp(log_norm - 0.5 * np.einsum("cngk,cngk->cng", d, d))
        sums[:, lo:hi] = lam.sum(axis=2)
        gram[:, :, lo:hi] = np.einsum("ang,bng->abn", lam, lam)
    return sums, gram
