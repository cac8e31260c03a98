import numpy as np
import pytest

from arrowspmm import kernels


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "numba" and not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(kernels, "USE_JIT", request.param == "numba")
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
