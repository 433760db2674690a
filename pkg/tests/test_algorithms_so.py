import numpy as np
import pytest

from evoflow.algorithms.cmaes import CMAES, recombination_weights
from evoflow.algorithms.de import DE, de_mutant
from evoflow.algorithms.pso import PSO
from evoflow.errors import ConfigurationError, ContractViolation
from evoflow.problems import Sphere
from support import bare_state, drive

LO, HI = -5.12 * np.ones(4), 5.12 * np.ones(4)


# --- PSO ----------------------------------------------------------------------------


def test_pso_fixed_point():
    pso = PSO(LO, HI, pop_size=1)
    x = np.array([[1.0, 2.0, -1.0, 0.5]])
    s = bare_state(pso).update(pos=x, pbest=x, gbest=x[0], pbest_fit=np.array([6.25]), gbest_fit=6.25)
    s = pso.tell(s, np.array([[6.25]]))
    assert np.array_equal(s["pos"], x)
    assert np.all(s["vel"] == 0)


def test_pso_zero_inertia_single_particle_at_gbest():
    pso = PSO(LO, HI, pop_size=1, w=0.0)
    s = bare_state(pso)
    for _ in range(5):
        pop, s = pso.ask(s)
        s = pso.tell(s, np.sum(pop * pop, axis=1, keepdims=True))
        assert np.all(s["vel"] == 0)


def test_pso_ties_keep_incumbent():
    pso = PSO(LO, HI, pop_size=3)
    start = bare_state(pso)
    s = pso.tell(start, np.array([[1.0], [1.0], [2.0]]))
    # first-encountered minimum wins
    assert np.array_equal(s["gbest"], start["pos"][0])
    s = pso.tell(s, np.array([[1.0], [1.0], [1.0]]))
    # equal fitness is not an improvement
    assert np.array_equal(s["gbest"], start["pos"][0])
    assert np.array_equal(s["pbest"][:2], start["pos"][:2])


def test_pso_positions_in_bounds():
    pso = PSO(LO, HI, pop_size=20, w=1.5, c1=4.0, c2=4.0)
    drive(pso, Sphere(4), 30, on_step=lambda t, s, f: _assert_in(s["pos"]))


def _assert_in(x):
    assert np.all(x >= LO) and np.all(x <= HI)


def test_pso_wrong_fitness_rows():
    pso = PSO(LO, HI, pop_size=5)
    with pytest.raises(ContractViolation, match="pso"):
        pso.tell(bare_state(pso), np.zeros((4, 1)))


# --- DE -----------------------------------------------------------------------------


def test_de_mutant_examples():
    xa = np.array([0.3, -1.0])
    assert np.array_equal(de_mutant(xa, np.ones(2), np.ones(2), 0.5), xa)
    assert de_mutant(np.zeros(2), np.array([2.0, 2.0]), np.zeros(2), 0.5).tolist() == [1.0, 1.0]


def test_de_config_errors():
    with pytest.raises(ConfigurationError):
        DE(LO, HI, pop_size=3)
    with pytest.raises(ConfigurationError):
        DE(LO, HI, f=0.0)


def test_de_monotone_best_and_bounds():
    de = DE(LO, HI, pop_size=12)
    history = []

    def check(t, s, fit):
        _assert_in(s["pop"])
        history.append(float(s["fit"].min()))

    drive(de, Sphere(4), 40, on_step=check)
    assert all(b <= a for a, b in zip(history, history[1:]))


def test_de_trial_wins_ties():
    de = DE(LO, HI, pop_size=4)
    s = bare_state(de)
    _, s = de.ask(s)
    s = de.tell(s, np.ones((4, 1)))
    pop_before = s["pop"]
    _, s = de.ask(s)
    s = de.tell(s, np.ones((4, 1)))
    assert np.array_equal(s["pop"], s["trial"]) and not np.array_equal(s["pop"], pop_before)


def test_de_cr_zero_changes_one_coordinate():
    de = DE(LO, HI, pop_size=6, cr=0.0)
    s = bare_state(de)
    trial, _ = de.ask(s)
    changed = (trial != s["pop"]).sum(axis=1)
    assert np.all(changed <= 1)


# --- CMA-ES --------------------------------------------------------------------------


def test_cmaes_weights():
    w = recombination_weights(2)
    assert np.allclose(w, [0.8042, 0.1958], atol=5e-5)
    assert recombination_weights(7).sum() == pytest.approx(1.0, abs=1e-15)


def test_cmaes_defaults():
    es = CMAES(np.zeros(10), np.ones(10))
    assert es.pop_size == 4 + int(3 * np.log(10))
    assert es.mu == es.pop_size // 2
    assert es.sigma0 == pytest.approx(0.3)


def test_cmaes_zero_sigma_samples_mean():
    es = CMAES(LO, HI, pop_size=6)
    s = bare_state(es).update(sigma=0.0)
    x, _ = es.ask(s)
    assert np.all(x == s["mean"])


def test_cmaes_rejects_nonfinite():
    es = CMAES(LO, HI)
    s = bare_state(es)
    _, s = es.ask(s)
    fit = np.zeros((es.pop_size, 1))
    fit[0] = np.nan
    with pytest.raises(ContractViolation):
        es.tell(s, fit)


def test_cmaes_covariance_symmetric_and_pd():
    es = CMAES(LO, HI)

    def check(t, s, fit):
        c = s["C"]
        assert np.max(np.abs(c - c.T)) <= 1e-9
        assert s["sigma"] > 0

    drive(es, Sphere(4), 60, on_step=check)


# --- shared -----------------------------------------------------------------------------


@pytest.mark.parametrize("cls", [PSO, DE, CMAES])
def test_replay_is_bitwise(cls):
    a = drive(cls(LO, HI, pop_size=8), Sphere(4), 15, seed=3)
    b = drive(cls(LO, HI, pop_size=8), Sphere(4), 15, seed=3)
    assert a == b
