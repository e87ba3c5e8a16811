import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def eig_volume_oracle(z, epsilon=1.0):
    """Independent eigenvalue-product evaluation of the volume formula.

    0.5 * sum_j log2(1 + d/(m eps^2) * lambda_j) over the eigenvalues of the
    centered d x d Gram matrix; a different code path from the shipped
    Cholesky kernel.
    """
    z = np.asarray(z, dtype=np.float64)
    d, m = z.shape
    zc = z - z.mean(axis=1, keepdims=True)
    lam = np.linalg.eigvalsh(zc @ zc.T)
    lam = np.clip(lam, 0.0, None)
    return 0.5 * float(np.sum(np.log2(1.0 + (d / (m * epsilon**2)) * lam)))


def random_orthogonal(dim, rng):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))
