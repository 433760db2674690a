"""IBEA with the additive epsilon indicator."""

from __future__ import annotations

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.operators import eps_indicator, polynomial_mutation, sbx_crossover, tournament_select
from evoflow.rng import key_split
from evoflow.tensor import rand_uniform


def scale_objectives(fit: np.ndarray) -> np.ndarray:
    """Map each objective to [0, 1] by the set's own min/max; a constant objective maps to 0."""
    lo = fit.min(axis=0)
    span = fit.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (fit - lo) / safe, 0.0)


def indicator_matrix(fit: np.ndarray) -> np.ndarray:
    """``I[i, j] = I_eps+(f_i, f_j)``."""
    return eps_indicator(fit[:, None, :], fit[None, :, :])


def ibea_fitness(fit: np.ndarray, kappa: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Indicator fitness ``F(x) = sum_{y != x} -exp(-I(y, x) / (c kappa))`` and the loss matrix.

    ``loss[y, x] = exp(-I(y, x) / (c kappa))`` is what removing ``y`` gives back to ``F(x)``.
    """
    ind = indicator_matrix(scale_objectives(fit))
    c = float(np.max(np.abs(ind)))
    if c == 0.0:
        c = 1.0
    loss = np.exp(-ind / (c * kappa))
    f = -(loss.sum(axis=0) - np.diag(loss))
    return f, loss


def ibea_select(fit: np.ndarray, n: int, kappa: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Drop the lowest-fitness member one at a time until ``n`` remain.

    Returns the ascending survivor indices and their fitness after the removals.
    """
    f, loss = ibea_fitness(fit, kappa)
    alive = np.ones(fit.shape[0], dtype=bool)
    for _ in range(fit.shape[0] - n):
        worst = int(np.argmin(np.where(alive, f, np.inf)))
        alive[worst] = False
        f = f + loss[worst]
    keep = np.flatnonzero(alive)
    return keep, f[keep]


class IBEA(Algorithm):
    name = "ibea"

    def __init__(
        self,
        lo,
        hi,
        pop_size: int = 100,
        n_objectives: int = 2,
        kappa: float = 0.05,
        eta_c: float = 20.0,
        eta_m: float = 20.0,
        p_c: float = 1.0,
        p_m: float | None = None,
    ):
        super().__init__(lo, hi, pop_size)
        require(self.pop_size >= 2 and self.pop_size % 2 == 0, "IBEA needs an even pop_size", "pop_size")
        require(kappa > 0, "kappa must be positive", "algorithm.params.kappa")
        self.n_objectives = n_objectives
        self.kappa = float(kappa)
        self.eta_c, self.eta_m, self.p_c = eta_c, eta_m, p_c
        self.p_m = p_m if p_m is not None else 1.0 / self.dim

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pop = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {"pop": pop, "fit": None, "score": None, "offspring": pop, "key": k_next}

    def ask(self, state):
        if state["fit"] is None:
            return state["pop"], state
        key, k_sel, k_x, k_m = key_split(state["key"], 4)
        mates = tournament_select(k_sel, -state["score"], self.pop_size, 2)
        off = sbx_crossover(k_x, state["pop"][mates], self.eta_c, self.p_c, self.lo, self.hi)
        off = polynomial_mutation(k_m, off, self.eta_m, self.p_m, self.lo, self.hi)
        return off, state.update(offspring=off, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, self.n_objectives)
        if state["fit"] is None:
            score, _ = ibea_fitness(fit, self.kappa)
            return state.update(fit=fit, score=score)
        merged_pop = np.vstack([state["pop"], state["offspring"]])
        merged_fit = np.vstack([state["fit"], fit])
        keep, score = ibea_select(merged_fit, self.pop_size, self.kappa)
        return state.update(pop=merged_pop[keep], fit=merged_fit[keep], score=score)
