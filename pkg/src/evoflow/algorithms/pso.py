"""Global-best particle swarm optimization."""

from __future__ import annotations

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.rng import key_split
from evoflow.tensor import clip, rand_uniform


class PSO(Algorithm):
    """Canonical inertia-weight PSO.

    ``v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)``, ``x <- clip(x + v)``.
    The first ask returns the uniform initial swarm; every tell updates the
    personal and global bests (strict improvement only) and then moves the
    swarm, so the next ask returns the moved positions.
    """

    name = "pso"

    def __init__(self, lo, hi, pop_size: int = 100, w: float = 0.6, c1: float = 2.5, c2: float = 0.8):
        super().__init__(lo, hi, pop_size)
        require(self.pop_size >= 1, "pop_size must be >= 1", "pop_size")
        self.w, self.c1, self.c2 = float(w), float(c1), float(c2)

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pos = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {
            "pos": pos,
            "vel": np.zeros_like(pos),
            "pbest": pos,
            "pbest_fit": np.full(self.pop_size, np.inf),
            "gbest": pos[0],
            "gbest_fit": np.inf,
            "key": k_next,
        }

    def ask(self, state):
        return state["pos"], state

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, 1)[:, 0]
        pos = state["pos"]
        better = fit < state["pbest_fit"]
        pbest = np.where(better[:, None], pos, state["pbest"])
        pbest_fit = np.where(better, fit, state["pbest_fit"])
        gbest, gbest_fit = state["gbest"], state["gbest_fit"]
        i = int(np.argmin(fit))
        if fit[i] < gbest_fit:
            gbest, gbest_fit = pos[i], float(fit[i])
        key, k1, k2 = key_split(state["key"], 3)
        r1 = rand_uniform(k1, self.pop_size, self.dim)
        r2 = rand_uniform(k2, self.pop_size, self.dim)
        vel = self.w * state["vel"] + self.c1 * r1 * (pbest - pos) + self.c2 * r2 * (gbest - pos)
        return state.update(
            pos=clip(pos + vel, self.lo, self.hi),
            vel=vel,
            pbest=pbest,
            pbest_fit=pbest_fit,
            gbest=gbest,
            gbest_fit=gbest_fit,
            key=key,
        )
