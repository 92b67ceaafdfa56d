import numpy as np
import pytest

from conftest import random_signed_graph
from signed_ego import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def canon(tri):
    return np.array(sorted(map(tuple, np.sort(tri, axis=1))), dtype=np.int64).reshape(-1, 3)


@needs_numba
@pytest.mark.parametrize("seed", range(10))
def test_triangle_backends_agree(seed):
    arrays = random_signed_graph(seed, n=40, p=0.25).to_arrays()[:3]
    a = _kernels.triangle_edges_numpy(*arrays)
    b = _kernels.triangle_edges_numba(*arrays)
    np.testing.assert_array_equal(canon(a), canon(b))


@needs_numba
@pytest.mark.parametrize("seed", range(10))
def test_mean_shift_backends_agree(seed):
    rng = np.random.default_rng(seed)
    x = np.sort(np.concatenate([rng.normal(0, 0.3, 50), rng.normal(3, 0.3, 30)]))
    seeds = np.unique(x)
    a = _kernels.mean_shift_modes_numpy(x, seeds, 0.5, 1e-7, 500)
    b = _kernels.mean_shift_modes_numba(x, seeds, 0.5, 1e-7, 500)
    np.testing.assert_array_equal(a, b)


def test_empty_graph_kernels():
    empty = np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    assert _kernels.triangle_edges(*empty).shape == (0, 3)


def test_env_flag_selects_backend(monkeypatch):
    import importlib

    monkeypatch.setenv("SIGNED_EGO_NUMBA", "0")
    mod = importlib.reload(_kernels)
    try:
        assert mod.USE_NUMBA is False
    finally:
        monkeypatch.delenv("SIGNED_EGO_NUMBA")
        importlib.reload(_kernels)
