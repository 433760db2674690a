"""The compiled and numpy kernel backends must agree bit for bit."""

import numpy as np
import pytest

from evoflow import _pykernels, kernels

ckernels = pytest.importorskip("evoflow._ckernels")


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("start,n", [(0, 0), (0, 1), (5, 1000), (2**40, 17)])
def test_random_bits(start, n):
    hi, lo = 0x0123456789ABCDEF, 0xFEDCBA9876543210
    assert np.array_equal(ckernels.random_bits(hi, lo, start, n), _pykernels.random_bits(hi, lo, start, n))


@pytest.mark.parametrize("shape", [(1, 1, 1), (3, 5, 2), (17, 33, 9)])
def test_matmul(shape):
    n, k, m = shape
    rng = np.random.default_rng(sum(shape))
    a, b = rng.standard_normal((n, k)), rng.standard_normal((k, m))
    assert np.array_equal(ckernels.matmul(a, b), _pykernels.matmul(a, b))


@pytest.mark.parametrize("n", [1, 2, 7, 24])
def test_jacobi(n):
    a = np.random.default_rng(n).standard_normal((n, n))
    a = (a + a.T) / 2
    wc, vc, sc, okc = ckernels.jacobi_eig(a, 100, 1e-12)
    wp, vp, sp, okp = _pykernels.jacobi_eig(a, 100, 1e-12)
    assert okc and okp and sc == sp
    assert np.array_equal(wc, wp) and np.array_equal(vc, vp)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_nd_rank(m):
    fit = np.random.default_rng(m).integers(0, 6, size=(120, m)).astype(float)
    assert np.array_equal(ckernels.nd_rank(fit), _pykernels.nd_rank(fit))
