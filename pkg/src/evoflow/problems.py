"""Benchmark problems behind the ``evaluate`` contract.

A problem maps a ``P x D`` population to a ``P x M`` fitness matrix, row by
row. All problems here are stateless: ``evaluate`` hands its state back
unchanged.
"""

from __future__ import annotations

import time
from typing import Any

import numpy as np

from evoflow.errors import ConfigurationError, ContractViolation, InvalidArgument
from evoflow.operators import lattice_resolution, reference_vectors
from evoflow.rng import Key
from evoflow.state import State


class Problem:
    """Base class. Subclasses implement :meth:`_evaluate` on a validated matrix."""

    name = "problem"
    n_objectives = 1

    def __init__(self, dim: int, lo, hi):
        if dim < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {dim}", "dim")
        self.dim = int(dim)
        self.lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (self.dim,)).copy()
        self.hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (self.dim,)).copy()
        if np.any(self.lo >= self.hi):
            raise ConfigurationError("lower bounds must be below upper bounds", "problem.params")

    def setup(self, key: Key) -> dict[str, Any]:
        return {}

    def evaluate(self, state: State, pop: np.ndarray) -> tuple[np.ndarray, State]:
        pop = np.asarray(pop, dtype=np.float64)
        if pop.ndim != 2 or pop.shape[1] != self.dim:
            raise ContractViolation(f"expected a P x {self.dim} population, got shape {pop.shape}", self.name)
        if pop.shape[0] == 0:
            return np.empty((0, self.n_objectives)), state
        if np.any(pop < self.lo) or np.any(pop > self.hi):
            raise ContractViolation("population outside the problem bounds", self.name)
        return self._evaluate(pop), state

    def _evaluate(self, pop: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pareto_front(self, n: int) -> np.ndarray:
        raise InvalidArgument(f"{self.name} has no analytic Pareto front")

    @property
    def has_front(self) -> bool:
        return type(self).pareto_front is not Problem.pareto_front


class Sphere(Problem):
    name = "sphere"

    def __init__(self, dim: int = 10, lo: float = -5.12, hi: float = 5.12):
        super().__init__(dim, lo, hi)

    def _evaluate(self, pop):
        return np.sum(pop * pop, axis=1, keepdims=True)


class SlowSphere(Sphere):
    """Sphere that busy-waits ``ms_per_individual`` per row; a stand-in for costly evaluations."""

    name = "slow_sphere"

    def __init__(self, dim: int = 10, ms_per_individual: float = 1.0, lo: float = -5.12, hi: float = 5.12):
        super().__init__(dim, lo, hi)
        self.ms_per_individual = float(ms_per_individual)

    def _evaluate(self, pop):
        for _ in range(pop.shape[0]):
            deadline = time.perf_counter() + self.ms_per_individual / 1000.0
            while time.perf_counter() < deadline:
                pass
        return super()._evaluate(pop)


class ZDT(Problem):
    n_objectives = 2

    def __init__(self, dim: int = 30):
        if dim < 2:
            raise ConfigurationError("ZDT problems need dim >= 2", "dim")
        super().__init__(dim, 0.0, 1.0)

    def _shape(self, ratio: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _evaluate(self, pop):
        f1 = pop[:, 0]
        g = 1.0 + 9.0 * np.sum(pop[:, 1:], axis=1) / (self.dim - 1)
        f2 = g * self._shape(f1 / g)
        return np.column_stack([f1, f2])

    def pareto_front(self, n: int) -> np.ndarray:
        f1 = np.linspace(0.0, 1.0, n)
        return np.column_stack([f1, self._shape(f1)])


class ZDT1(ZDT):
    name = "zdt1"

    def _shape(self, ratio):
        return 1.0 - np.sqrt(ratio)


class ZDT2(ZDT):
    name = "zdt2"

    def _shape(self, ratio):
        return 1.0 - ratio**2


class DTLZ(Problem):
    default_k = 5

    def __init__(self, n_objectives: int = 3, k: int | None = None, dim: int | None = None):
        if n_objectives < 2:
            raise ConfigurationError("DTLZ problems need at least 2 objectives", "n_objectives")
        if k is None:
            k = self.default_k if dim is None else dim - n_objectives + 1
        if dim is not None and dim != n_objectives - 1 + k:
            raise ConfigurationError(f"dim must equal n_objectives - 1 + k = {n_objectives - 1 + k}", "dim")
        if k < 1:
            raise ConfigurationError("k must be >= 1", "problem.params.k")
        self.n_objectives = n_objectives
        self.k = k
        super().__init__(n_objectives - 1 + k, 0.0, 1.0)

    def _lattice(self, n: int) -> np.ndarray:
        h = lattice_resolution(self.n_objectives, n)
        return reference_vectors(self.n_objectives, h).lattice


class DTLZ1(DTLZ):
    name = "dtlz1"
    default_k = 5

    def _evaluate(self, pop):
        m = self.n_objectives
        xm = pop[:, m - 1 :] - 0.5
        g = 100.0 * (self.k + np.sum(xm * xm - np.cos(20.0 * np.pi * xm), axis=1))
        f = np.empty((pop.shape[0], m))
        for i in range(m):
            v = 0.5 * (1.0 + g) * np.prod(pop[:, : m - 1 - i], axis=1)
            if i > 0:
                v = v * (1.0 - pop[:, m - 1 - i])
            f[:, i] = v
        return f

    def pareto_front(self, n: int) -> np.ndarray:
        return 0.5 * self._lattice(n)


class DTLZ2(DTLZ):
    name = "dtlz2"
    default_k = 10

    def _evaluate(self, pop):
        m = self.n_objectives
        xm = pop[:, m - 1 :] - 0.5
        g = np.sum(xm * xm, axis=1)
        angles = pop[:, : m - 1] * (np.pi / 2.0)
        f = np.empty((pop.shape[0], m))
        for i in range(m):
            v = (1.0 + g) * np.prod(np.cos(angles[:, : m - 1 - i]), axis=1)
            if i > 0:
                v = v * np.sin(angles[:, m - 1 - i])
            f[:, i] = v
        return f

    def pareto_front(self, n: int) -> np.ndarray:
        lat = self._lattice(n)
        return lat / np.linalg.norm(lat, axis=1, keepdims=True)


def pareto_front_sample(problem: Problem, n: int) -> np.ndarray:
    """Deterministic sample of the analytic front.

    Two-objective fronts return exactly ``n`` points; for three or more
    objectives the largest simplex lattice with at most ``n`` points is used.
    """
    if not problem.has_front:
        raise InvalidArgument(f"no analytic front for {problem.name}")
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return problem.pareto_front(n)
