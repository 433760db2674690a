"""DE/rand/1/bin."""

from __future__ import annotations

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.operators import distinct_indices_batch
from evoflow.rng import key_split
from evoflow.tensor import clip, rand_int, rand_uniform


def de_mutant(xa, xb, xc, f: float):
    return xa + f * (xb - xc)


class DE(Algorithm):
    """Differential evolution with rand/1 mutation and binomial crossover.

    The initial population carries fitness ``+inf``, so the first generation
    of trials replaces it wholesale; after that replacement is one-to-one and
    greedy (a trial wins ties).
    """

    name = "de"

    def __init__(self, lo, hi, pop_size: int = 100, f: float = 0.5, cr: float = 0.9):
        super().__init__(lo, hi, pop_size)
        require(self.pop_size >= 4, "DE needs pop_size >= 4", "pop_size")
        require(0.0 < f <= 2.0, "F must lie in (0, 2]", "algorithm.params.f")
        require(0.0 <= cr <= 1.0, "CR must lie in [0, 1]", "algorithm.params.cr")
        self.f, self.cr = float(f), float(cr)

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pop = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {"pop": pop, "fit": np.full(self.pop_size, np.inf), "trial": pop, "key": k_next}

    def ask(self, state):
        key, k_idx, k_cr, k_j = key_split(state["key"], 4)
        n, d = self.pop_size, self.dim
        pop = state["pop"]
        abc = distinct_indices_batch(k_idx, n, 3, exclude=np.arange(n), rows=n)
        mutant = de_mutant(pop[abc[:, 0]], pop[abc[:, 1]], pop[abc[:, 2]], self.f)
        forced = rand_int(k_j, n, d)
        cross = rand_uniform(k_cr, n, d) < self.cr
        cross[np.arange(n), forced] = True
        trial = clip(np.where(cross, mutant, pop), self.lo, self.hi)
        return trial, state.update(trial=trial, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, 1)[:, 0]
        win = fit <= state["fit"]
        return state.update(
            pop=np.where(win[:, None], state["trial"], state["pop"]),
            fit=np.where(win, fit, state["fit"]),
        )
