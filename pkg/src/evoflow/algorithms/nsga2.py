"""NSGA-II: elitist non-dominated sorting with crowding distance."""

from __future__ import annotations

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.operators import (
    crowding_distance,
    non_dominated_sort,
    polynomial_mutation,
    sbx_crossover,
    tournament_select,
)
from evoflow.rng import key_split
from evoflow.tensor import rand_uniform


def rank_and_crowding(fit: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranking = non_dominated_sort(fit)
    crowd = np.empty(fit.shape[0])
    for front in ranking.fronts:
        crowd[front] = crowding_distance(fit[front])
    return ranking.rank, crowd


def environmental_selection(fit: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors, ascending: whole fronts first, the cut front by descending crowding."""
    chosen: list[np.ndarray] = []
    remaining = n
    for front in non_dominated_sort(fit).fronts:
        if front.size <= remaining:
            chosen.append(front)
            remaining -= front.size
        else:
            crowd = crowding_distance(fit[front])
            chosen.append(front[np.argsort(-crowd, kind="stable")[:remaining]])
            remaining = 0
        if remaining == 0:
            break
    return np.sort(np.concatenate(chosen))


class NSGA2(Algorithm):
    name = "nsga2"

    def __init__(
        self,
        lo,
        hi,
        pop_size: int = 100,
        n_objectives: int = 2,
        eta_c: float = 20.0,
        eta_m: float = 20.0,
        p_c: float = 1.0,
        p_m: float | None = None,
    ):
        super().__init__(lo, hi, pop_size)
        require(self.pop_size >= 2 and self.pop_size % 2 == 0, "NSGA-II needs an even pop_size", "pop_size")
        self.n_objectives = n_objectives
        self.eta_c, self.eta_m, self.p_c = eta_c, eta_m, p_c
        self.p_m = p_m if p_m is not None else 1.0 / self.dim

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pop = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {"pop": pop, "fit": None, "rank": None, "crowd": None, "offspring": pop, "key": k_next}

    def ask(self, state):
        if state["fit"] is None:
            return state["pop"], state
        key, k_sel, k_x, k_m = key_split(state["key"], 4)
        # ordinal score: lower rank first, then larger crowding, then lower index
        order = np.lexsort((-state["crowd"], state["rank"]))
        score = np.empty(self.pop_size)
        score[order] = np.arange(self.pop_size)
        mates = tournament_select(k_sel, score, self.pop_size, 2)
        off = sbx_crossover(k_x, state["pop"][mates], self.eta_c, self.p_c, self.lo, self.hi)
        off = polynomial_mutation(k_m, off, self.eta_m, self.p_m, self.lo, self.hi)
        return off, state.update(offspring=off, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, self.n_objectives)
        if state["fit"] is None:
            pop = state["pop"]
        else:
            merged_pop = np.vstack([state["pop"], state["offspring"]])
            merged_fit = np.vstack([state["fit"], fit])
            keep = environmental_selection(merged_fit, self.pop_size)
            pop, fit = merged_pop[keep], merged_fit[keep]
        rank, crowd = rank_and_crowding(fit)
        return state.update(pop=pop, fit=fit, rank=rank, crowd=crowd)
