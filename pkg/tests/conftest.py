import numpy as np
import pytest

from cuberoot import _backend, _kernels_py

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _backend.BACKEND == "cython":
    BACKENDS.append(pytest.param(_backend.kernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
