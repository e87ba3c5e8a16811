"""Numba-jitted volume kernels (default backend).

Single-threaded on purpose: results must be bit-stable for a fixed input,
so no prange and no fastmath. Keep in sync with ``_kernels_numpy``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def centered_logdet_volume(z, scale, use_dual):
    d, m = z.shape
    zc = np.empty_like(z)
    for i in range(d):
        mu = 0.0
        for j in range(m):
            mu += z[i, j]
        mu /= m
        for j in range(m):
            zc[i, j] = z[i, j] - mu
    if use_dual:
        g = np.ascontiguousarray(zc.T) @ zc
    else:
        g = zc @ np.ascontiguousarray(zc.T)
    n = g.shape[0]
    a = scale * g
    for i in range(n):
        a[i, i] += 1.0
    # identity shift keeps eigenvalues >= 1: Cholesky is safe on finite input
    ell = np.linalg.cholesky(a)
    s = 0.0
    for i in range(n):
        s += np.log2(ell[i, i])
    return s if s > 0.0 else 0.0
