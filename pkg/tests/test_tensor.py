import numpy as np
import pytest

import oracles
from evoflow.errors import InvalidArgument, ShapeError
from evoflow.rng import key_new
from evoflow.tensor import (
    argsort,
    clip,
    inverse_permutation,
    matmul,
    rand_int,
    rand_normal,
    rand_uniform,
    sym_eig,
    take_rows,
)


def _random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


def test_rand_uniform_deterministic_and_in_range():
    k = key_new(0)
    a = rand_uniform(k, 50, 7, -2.0, 3.0)
    assert np.array_equal(a, rand_uniform(k, 50, 7, -2.0, 3.0))
    assert a.min() >= -2.0 and a.max() < 3.0


def test_rand_uniform_mean():
    u = rand_uniform(key_new(1), 1000, 1000)
    assert abs(u.mean() - 0.5) < 0.005


def test_rand_uniform_per_column_bounds():
    lo, hi = np.array([0.0, 10.0]), np.array([1.0, 11.0])
    a = rand_uniform(key_new(2), 1000, 2, lo, hi)
    assert np.all(a >= lo) and np.all(a < hi)


def test_rand_uniform_rejects_empty_interval():
    with pytest.raises(InvalidArgument):
        rand_uniform(key_new(0), 2, 2, 1.0, 1.0)


def test_rand_normal_moments():
    z = rand_normal(key_new(3), 1000, 1000)
    assert np.all(np.isfinite(z))
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01
    assert np.array_equal(z, rand_normal(key_new(3), 1000, 1000))


def test_rand_normal_odd_count():
    z = rand_normal(key_new(3), 3, 3)
    assert z.shape == (3, 3)
    assert np.array_equal(z.ravel(), rand_normal(key_new(3), 1, 10).ravel()[:9])


def test_rand_int_range():
    r = rand_int(key_new(5), 10_000, 7)
    assert r.min() == 0 and r.max() == 6


def test_matmul_hand_example():
    assert matmul([[1, 2], [3, 4]], [[5], [6]]).tolist() == [[17.0], [39.0]]


def test_matmul_identity():
    a = np.random.default_rng(0).standard_normal((5, 5))
    assert np.array_equal(matmul(np.eye(5), a), a)


def test_matmul_matches_naive_oracle():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((8, 8)), rng.standard_normal((8, 8))
    # left-to-right accumulation: the oracle sums in the same order, so equality is exact
    assert np.array_equal(matmul(a, b), np.asarray(oracles.naive_matmul(a.tolist(), b.tolist())))


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_sym_eig_diagonal():
    w, v = sym_eig(np.diag([3.0, 1.0, 2.0]))
    assert w.tolist() == [1.0, 2.0, 3.0]
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_sym_eig_two_by_two():
    w, _ = sym_eig([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(w, [1.0, 3.0], atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_sym_eig_reconstruction(seed):
    a = _random_symmetric(np.random.default_rng(seed), 16)
    w, v = sym_eig(a)
    assert np.linalg.norm(v @ np.diag(w) @ v.T - a) < 1e-8
    assert np.linalg.norm(v.T @ v - np.eye(16)) < 1e-8
    assert np.all(np.diff(w) >= 0)


def test_sym_eig_errors():
    with pytest.raises(ShapeError):
        sym_eig(np.ones((2, 3)))
    with pytest.raises(InvalidArgument):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])


def test_argsort_examples():
    assert argsort([3, 1, 2]).tolist() == [1, 2, 0]
    assert argsort([1, 1, 0]).tolist() == [2, 0, 1]
    assert argsort([1, 2, 2]).tolist() == [0, 1, 2]
    assert argsort([1, 2, 2], descending=True).tolist() == [1, 2, 0]


def test_permutation_round_trip():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((20, 3))
    perm = argsort(rng.standard_normal(20))
    assert np.array_equal(take_rows(take_rows(a, perm), inverse_permutation(perm)), a)


def test_clip_bounds():
    x = np.random.default_rng(3).standard_normal((100, 4)) * 10
    c = clip(x, -1.0, 2.0)
    assert c.min() >= -1.0 and c.max() <= 2.0
