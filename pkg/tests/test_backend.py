import numpy as np
import pytest

from difftest import _kernels_py
from difftest.backend import backend_name, kernels

compiled = pytest.importorskip("difftest._kernels",
                               reason="compiled extension not built")


def test_backend_name_valid():
    assert backend_name() in ("python", "compiled")
    assert kernels.BACKEND == backend_name()


def _noise(seed=12, n=400, m_sub=10):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n * m_sub), n, m_sub


def test_euler_path_agreement():
    z, n, m = _noise()
    for kind in (0, 1, 2):
        fast = compiled.euler_path_1d(kind, 0.5, 0.5, 0.25, 1.0, n, m, 0.01, z)
        slow = _kernels_py.euler_path_1d(kind, 0.5, 0.5, 0.25, 1.0, n, m, 0.01, z)
        assert np.allclose(fast, slow, atol=1e-14)


def test_euler_path_mou_agreement():
    rng = np.random.default_rng(4)
    z = rng.standard_normal((200 * 10, 2))
    fast = compiled.euler_path_mou(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 200, 10, 0.01, z)
    slow = _kernels_py.euler_path_mou(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 200, 10, 0.01, z)
    assert np.allclose(fast, slow, atol=1e-14)


def test_contrast_agreement():
    z, n, m = _noise(seed=3)
    x = _kernels_py.euler_path_1d(0, 0.5, 0.5, 0.25, 1.0, n, m, 0.01, z)
    d = 0.01 * m
    for kind in (0, 1, 2):
        fast = compiled.contrast_terms_1d(kind, x, d, 0.4, 0.6, 0.3)
        slow = _kernels_py.contrast_terms_1d(kind, x, d, 0.4, 0.6, 0.3)
        assert np.allclose(fast, slow, atol=1e-12)
        tf = compiled.contrast_total_1d(kind, x, d, 0.4, 0.6, 0.3)
        ts = _kernels_py.contrast_total_1d(kind, x, d, 0.4, 0.6, 0.3)
        assert tf == pytest.approx(ts, rel=1e-12)
        assert tf == pytest.approx(np.sum(slow), rel=1e-12)


def test_contrast_mou_agreement():
    rng = np.random.default_rng(8)
    z = rng.standard_normal((100 * 10, 2))
    x = _kernels_py.euler_path_mou(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 100, 10, 0.01, z)
    fast = compiled.contrast_terms_mou(x, 0.1, 1.1, 1.9, 0.9, 1.1)
    slow = _kernels_py.contrast_terms_mou(x, 0.1, 1.1, 1.9, 0.9, 1.1)
    assert np.allclose(fast, slow, atol=1e-12)
