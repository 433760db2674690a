"""MOEA/D with Tchebycheff decomposition."""

from __future__ import annotations

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.operators import (
    distinct_indices_batch,
    lattice_resolution,
    polynomial_mutation,
    reference_vectors,
    sbx_crossover,
    tchebycheff,
)
from evoflow.rng import key_split
from evoflow.tensor import rand_uniform


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    """The ``t`` nearest weight vectors of each weight vector, by distance then index."""
    diff = weights[:, None, :] - weights[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return np.argsort(dist, axis=1, kind="stable")[:, :t]


class MOEAD(Algorithm):
    """One subproblem per simplex-lattice weight vector.

    The lattice resolution is the largest one with at most ``pop_size``
    vectors, and the population size becomes that vector count. Each ask
    breeds one trial per subproblem from two distinct neighbours; tell
    updates the ideal point and then, subproblem by subproblem in index
    order, lets the trial replace up to ``n_r`` neighbours it beats.
    """

    name = "moead"

    def __init__(
        self,
        lo,
        hi,
        pop_size: int = 100,
        n_objectives: int = 2,
        t: int = 20,
        n_r: int = 2,
        eta_c: float = 20.0,
        eta_m: float = 20.0,
        p_c: float = 1.0,
        p_m: float | None = None,
    ):
        require(n_objectives >= 2, "MOEA/D needs at least 2 objectives", "n_objectives")
        h = lattice_resolution(n_objectives, int(pop_size))
        self.ref = reference_vectors(n_objectives, h)
        super().__init__(lo, hi, self.ref.lattice.shape[0])
        self.requested_pop_size = int(pop_size)
        self.n_objectives = n_objectives
        self.t = max(2, min(int(t), self.pop_size))
        require(self.pop_size >= 2, "MOEA/D needs at least 2 subproblems", "pop_size")
        self.n_r = int(n_r)
        self.weights = self.ref.lattice
        self.neighbors = neighborhoods(self.weights, self.t)
        self.eta_c, self.eta_m, self.p_c = eta_c, eta_m, p_c
        self.p_m = p_m if p_m is not None else 1.0 / self.dim

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pop = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {"pop": pop, "fit": None, "z": None, "trial": pop, "key": k_next}

    def ask(self, state):
        if state["fit"] is None:
            return state["pop"], state
        key, k_sel, k_x, k_m = key_split(state["key"], 4)
        k = self.pop_size
        slots = distinct_indices_batch(k_sel, self.t, 2, rows=k)
        mates = np.take_along_axis(self.neighbors, slots, axis=1)
        pairs = state["pop"][mates.reshape(-1)]
        trial = sbx_crossover(k_x, pairs, self.eta_c, self.p_c, self.lo, self.hi)[0::2]
        trial = polynomial_mutation(k_m, trial, self.eta_m, self.p_m, self.lo, self.hi)
        return trial, state.update(trial=trial, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, self.n_objectives)
        if state["fit"] is None:
            return state.update(fit=fit, z=fit.min(axis=0))
        z = np.minimum(state["z"], fit.min(axis=0))
        pop = state["pop"].copy()
        cur = state["fit"].copy()
        trial = state["trial"]
        for i in range(self.pop_size):
            nb = self.neighbors[i]
            lam = self.weights[nb]
            g_new = tchebycheff(fit[i], lam, z)
            g_old = tchebycheff(cur[nb], lam, z)
            hits = nb[g_new < g_old][: self.n_r]
            pop[hits] = trial[i]
            cur[hits] = fit[i]
        return state.update(pop=pop, fit=cur, z=z)
