"""Hot numeric kernels with a selectable backend.

Every kernel exists twice with identical signatures: a numba ``@njit``
version in :mod:`latspec._kernels.numba_impl` and a plain numpy version in
:mod:`latspec._kernels.numpy_impl`.  The numba build is the default; set
``LATSPEC_NUMBA=0`` in the environment to force the numpy fallback (useful
for debugging and for the backend benchmark in ``benchmarks/``).
"""

import os

__all__ = [
    "BACKEND",
    "get_backend",
    "uniform01",
    "csr_matvec",
    "transfer_sweep",
    "amplitude_sweep",
    "halfline_solution",
    "halfline_lognorm_sweep",
    "numerov_peaks",
]

_flag = os.environ.get("LATSPEC_NUMBA", "").strip().lower()
_use_numba = _flag not in ("0", "false", "off", "no")

if _use_numba:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        from . import numpy_impl as _impl

        BACKEND = "numpy"
else:
    from . import numpy_impl as _impl

    BACKEND = "numpy"

uniform01 = _impl.uniform01
csr_matvec = _impl.csr_matvec
transfer_sweep = _impl.transfer_sweep
amplitude_sweep = _impl.amplitude_sweep
halfline_solution = _impl.halfline_solution
halfline_lognorm_sweep = _impl.halfline_lognorm_sweep
numerov_peaks = _impl.numerov_peaks


def get_backend(name):
    """Return a kernel module by name ("numba" or "numpy"), for benchmarks
    and cross-backend equivalence tests."""
    if name == "numpy":
        from . import numpy_impl

        return numpy_impl
    if name == "numba":
        from . import numba_impl

        return numba_impl
    raise ValueError(f"unknown kernel backend {name!r}")
