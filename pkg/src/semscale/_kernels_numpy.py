"""Pure-numpy volume kernels (fallback backend).

Mirrors the numba kernels in ``_kernels_numba``; keep both in sync.
"""

import numpy as np


def centered_logdet_volume(z, scale, use_dual):
    """Half log2-determinant of I + scale * Gram(Z - row_means(Z)).

    ``z`` is (d, m) float64, one sample per column. ``use_dual`` selects the
    m x m Gram form Zc^T Zc instead of the d x d form Zc Zc^T; the two agree
    by the Sylvester determinant identity. The identity shift keeps every
    eigenvalue >= 1, so Cholesky cannot fail on finite input.
    """
    zc = z - z.mean(axis=1)[:, None]
    g = zc.T @ zc if use_dual else zc @ zc.T
    a = scale * g
    a[np.diag_indices_from(a)] += 1.0
    ell = np.linalg.cholesky(a)
    # det(A) = prod(L_ii)^2, so 0.5*log2 det(A) = sum(log2 L_ii)
    out = float(np.sum(np.log2(np.diag(ell))))
    return out if out > 0.0 else 0.0
