import math

import numpy as np
import pytest

import oracles
from evoflow.errors import ConfigurationError, ContractViolation, InvalidArgument
from evoflow.metrics import hypervolume_2d, igd
from evoflow.problems import DTLZ1, DTLZ2, ZDT1, ZDT2, SlowSphere, Sphere, pareto_front_sample
from evoflow.state import State

EMPTY = State("problem")


def _eval(problem, pop):
    fit, state = problem.evaluate(EMPTY, np.asarray(pop, dtype=float))
    assert state is EMPTY
    return fit


def test_sphere_examples():
    assert _eval(Sphere(3), [[0, 0, 0], [1, 2, 3]])[:, 0].tolist() == [0.0, 14.0]


def test_zdt1_examples():
    p = ZDT1(30)
    rows = np.zeros((3, 30))
    rows[1, 0] = 1.0
    rows[2, 0] = 0.25
    assert _eval(p, rows).tolist() == [[0.0, 1.0], [1.0, 0.0], [0.25, 0.5]]


def test_zdt2_on_front():
    x = np.zeros((1, 30))
    x[0, 0] = 0.5
    assert _eval(ZDT2(30), x).tolist() == [[0.5, 0.75]]


def test_dtlz1_front_condition():
    p = DTLZ1(3)
    assert p.dim == 7
    x = np.full((20, 7), 0.5)
    x[:, :2] = np.random.default_rng(0).random((20, 2))
    assert np.allclose(_eval(p, x).sum(axis=1), 0.5, atol=1e-12)


def test_dtlz2_front_condition():
    p = DTLZ2(3)
    assert p.dim == 12
    x = np.full((20, 12), 0.5)
    x[:, :2] = np.random.default_rng(1).random((20, 2))
    assert np.allclose(np.linalg.norm(_eval(p, x), axis=1), 1.0, atol=1e-12)


def test_dtlz_dim_validation():
    with pytest.raises(ConfigurationError):
        DTLZ2(3, dim=5, k=10)
    assert DTLZ2(3, dim=12).k == 10


def test_contract_errors():
    with pytest.raises(ContractViolation):
        Sphere(3).evaluate(EMPTY, np.zeros((2, 4)))
    with pytest.raises(ContractViolation):
        ZDT1(5).evaluate(EMPTY, np.full((1, 5), 1.5))


def test_empty_population():
    assert ZDT1(4).evaluate(EMPTY, np.empty((0, 4)))[0].shape == (0, 2)


@pytest.mark.parametrize("problem", [Sphere(6), ZDT1(6), ZDT2(6), DTLZ1(3, k=4), DTLZ2(3, k=4)])
def test_row_purity(problem):
    rng = np.random.default_rng(0)
    pop = problem.lo + (problem.hi - problem.lo) * rng.random((40, problem.dim))
    full = _eval(problem, pop)
    assert np.all(np.isfinite(full))
    rows = np.vstack([_eval(problem, pop[i : i + 1]) for i in range(40)])
    assert np.array_equal(full, rows)
    perm = rng.permutation(40)
    assert np.array_equal(_eval(problem, pop[perm]), full[perm])


def test_slow_sphere_same_values():
    pop = np.random.default_rng(0).random((3, 4))
    assert np.array_equal(_eval(SlowSphere(4, ms_per_individual=0.1), pop), _eval(Sphere(4), pop))


def test_front_samples():
    z = pareto_front_sample(ZDT1(), 3)
    assert np.allclose(z, [[0, 1], [0.5, 1 - math.sqrt(0.5)], [1, 0]])
    assert pareto_front_sample(ZDT1(), 1000).shape == (1000, 2)
    assert np.allclose(pareto_front_sample(ZDT2(), 5)[:, 1], 1 - np.linspace(0, 1, 5) ** 2)
    assert np.allclose(pareto_front_sample(DTLZ1(3), 100).sum(axis=1), 0.5)
    assert np.allclose(np.linalg.norm(pareto_front_sample(DTLZ2(3), 100), axis=1), 1.0)
    with pytest.raises(InvalidArgument):
        pareto_front_sample(Sphere(), 10)


def test_igd_examples():
    a = np.random.default_rng(0).random((10, 2))
    assert igd(a, a) == 0.0
    assert igd([[0, 0]], [[1, 0], [0, 1]]) == 1.0


def test_igd_matches_naive():
    rng = np.random.default_rng(1)
    for m in (2, 3):
        a, r = rng.random((40, m)), rng.random((70, m))
        assert abs(igd(a, r, chunk=16) - oracles.naive_igd(a, r)) < 1e-12


def test_hv_examples():
    assert hypervolume_2d([[1, 3], [2, 2], [3, 1]], [4, 4]) == 6.0
    assert hypervolume_2d([[1, 1]], [2, 2]) == 1.0
    assert hypervolume_2d([[1, 3], [2, 2], [3, 1], [3, 3]], [4, 4]) == 6.0
    with pytest.raises(InvalidArgument):
        hypervolume_2d([[5, 1]], [4, 4])


def test_hv_example_monte_carlo():
    front = [[1, 3], [2, 2], [3, 1]]
    assert oracles.monte_carlo_hv(front, [4, 4], 10**6) == pytest.approx(6.0, rel=0.01)
