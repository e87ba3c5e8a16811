"""Backend selection for the hot volume kernels.

The default backend is numba-jitted; set ``SEMSCALE_BACKEND=numpy`` to force
the pure-numpy twin (used by the benchmark in ``benchmarks/`` and as an
automatic fallback when numba is unavailable). The choice is read once at
import time.
"""

import os

from . import _kernels_numpy

BACKEND_ENV = "SEMSCALE_BACKEND"


def _load():
    want = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if want not in ("numba", "numpy"):
        raise ValueError(
            f"{BACKEND_ENV} must be 'numba' or 'numpy', got {want!r}"
        )
    if want == "numba":
        try:
            from . import _kernels_numba

            return _kernels_numba, "numba"
        except ImportError:
            return _kernels_numpy, "numpy"
    return _kernels_numpy, "numpy"


_impl, BACKEND = _load()

centered_logdet_volume = _impl.centered_logdet_volume


def active_backend():
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    return BACKEND
