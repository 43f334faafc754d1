import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from factorforge import kernels  # noqa: E402

BACKENDS = kernels.available_backends()
KERNEL_NAMES = ("philox4x32", "philox_grid", "gram", "jacobi_eigh", "mean_pairwise_euclidean")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Route the library through one kernel backend for the test."""
    impl = BACKENDS[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param
