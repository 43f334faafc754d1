"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy twins.
Set ``FACTORFORGE_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("FACTORFORGE_BACKEND", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND

philox4x32 = _impl.philox4x32
philox_grid = _impl.philox_grid
gram = _impl.gram
jacobi_eigh = _impl.jacobi_eigh
mean_pairwise_euclidean = _impl.mean_pairwise_euclidean


def available_backends():
    """Kernel modules importable in this environment, keyed by name."""
    found = {"python": _pykernels}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
