"""Ask/tell contract shared by every algorithm."""

from __future__ import annotations

from typing import Any

import numpy as np

from evoflow.errors import ConfigurationError, ContractViolation
from evoflow.rng import Key
from evoflow.state import State


class Algorithm:
    """An evolutionary algorithm as a state-transition system.

    ``setup(key)`` returns the initial slots; ``ask(state)`` returns
    ``(population, state)``; ``tell(state, fitness)`` returns the next state.
    Hyperparameters live on the instance and never change during a run.
    """

    name = "algorithm"

    def __init__(self, lo, hi, pop_size: int):
        self.lo = np.asarray(lo, dtype=np.float64).ravel()
        self.hi = np.asarray(hi, dtype=np.float64).ravel()
        if self.lo.shape != self.hi.shape or self.lo.size == 0:
            raise ConfigurationError("bounds must be non-empty vectors of equal length", "dim")
        if np.any(self.lo >= self.hi):
            raise ConfigurationError("lower bounds must be below upper bounds", "problem")
        self.dim = self.lo.size
        self.pop_size = int(pop_size)

    def setup(self, key: Key) -> dict[str, Any]:
        raise NotImplementedError

    def ask(self, state: State) -> tuple[np.ndarray, State]:
        raise NotImplementedError

    def tell(self, state: State, fitness: np.ndarray) -> State:
        raise NotImplementedError

    def _fitness(self, fitness, rows: int, n_obj: int | None = None) -> np.ndarray:
        fit = np.asarray(fitness, dtype=np.float64)
        if fit.ndim == 1:
            fit = fit[:, None]
        if fit.ndim != 2 or fit.shape[0] != rows or (n_obj is not None and fit.shape[1] != n_obj):
            want = f"{rows} x {n_obj}" if n_obj is not None else f"{rows} rows"
            raise ContractViolation(f"tell expected fitness of shape {want}, got {fit.shape}", self.name)
        return fit


def require(cond: bool, message: str, field: str | None = None) -> None:
    if not cond:
        raise ConfigurationError(message, field)
