"""Reference-vector guided evolutionary algorithm."""

from __future__ import annotations

import math

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.operators import lattice_resolution, polynomial_mutation, reference_vectors, sbx_crossover
from evoflow.rng import key_split
from evoflow.tensor import rand_int, rand_uniform


def smallest_angles(vectors: np.ndarray) -> np.ndarray:
    """Angle from each unit vector to its closest neighbour."""
    if vectors.shape[0] < 2:
        return np.ones(vectors.shape[0])
    cos = vectors @ vectors.T
    np.fill_diagonal(cos, -np.inf)
    return np.arccos(np.clip(cos.max(axis=1), -1.0, 1.0))


def apd(norms: np.ndarray, theta: np.ndarray, gamma: np.ndarray, n_obj: int, progress: float, alpha: float):
    """Angle-penalized distance ``(1 + M * progress**alpha * theta / gamma) * |f'|``."""
    return (1.0 + n_obj * progress**alpha * theta / gamma) * norms


def rvea_select(fit: np.ndarray, vectors: np.ndarray, progress: float, alpha: float = 2.0) -> np.ndarray:
    """Per reference vector, the index of its lowest-APD candidate; empty vectors are skipped."""
    shifted = fit - fit.min(axis=0)
    norms = np.sqrt(np.sum(shifted * shifted, axis=1))
    cos = (shifted @ vectors.T) / np.maximum(norms, 1e-300)[:, None]
    assign = np.argmax(cos, axis=1)
    theta = np.arccos(np.clip(cos[np.arange(fit.shape[0]), assign], -1.0, 1.0))
    gamma = smallest_angles(vectors)[assign]
    score = apd(norms, theta, gamma, fit.shape[1], progress, alpha)
    chosen = []
    for v in range(vectors.shape[0]):
        members = np.flatnonzero(assign == v)
        if members.size:
            chosen.append(members[np.argmin(score[members])])
    return np.asarray(chosen, dtype=np.int64)


class RVEA(Algorithm):
    """RVEA with random mating and periodic reference-vector adaptation.

    Elitist selection can keep fewer than ``pop_size`` candidates; the gap is
    filled by resampling survivors uniformly so the population size stays fixed.
    """

    name = "rvea"

    def __init__(
        self,
        lo,
        hi,
        pop_size: int = 100,
        n_objectives: int = 3,
        t_max: int | None = None,
        alpha: float = 2.0,
        fr: float = 0.1,
        eta_c: float = 20.0,
        eta_m: float = 20.0,
        p_c: float = 1.0,
        p_m: float | None = None,
    ):
        require(t_max is not None and t_max >= 1, "RVEA needs the generation budget t_max", "t_max")
        require(n_objectives >= 2, "RVEA needs at least 2 objectives", "n_objectives")
        h = lattice_resolution(n_objectives, int(pop_size))
        self.ref = reference_vectors(n_objectives, h)
        super().__init__(lo, hi, self.ref.vectors.shape[0])
        self.requested_pop_size = int(pop_size)
        self.n_objectives = n_objectives
        self.t_max = int(t_max)
        self.alpha = float(alpha)
        self.adapt_every = max(1, math.ceil(fr * self.t_max))
        self.eta_c, self.eta_m, self.p_c = eta_c, eta_m, p_c
        self.p_m = p_m if p_m is not None else 1.0 / self.dim

    def setup(self, key):
        k_init, k_next = key_split(key, 2)
        pop = rand_uniform(k_init, self.pop_size, self.dim, self.lo, self.hi)
        return {"pop": pop, "fit": None, "vectors": self.ref.vectors, "gen": 0, "offspring": pop, "key": k_next}

    def ask(self, state):
        if state["fit"] is None:
            return state["pop"], state
        key, k_sel, k_x, k_m = key_split(state["key"], 4)
        n = self.pop_size + self.pop_size % 2
        mates = rand_int(k_sel, n, self.pop_size)
        off = sbx_crossover(k_x, state["pop"][mates], self.eta_c, self.p_c, self.lo, self.hi)[: self.pop_size]
        off = polynomial_mutation(k_m, off, self.eta_m, self.p_m, self.lo, self.hi)
        return off, state.update(offspring=off, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, self.n_objectives)
        if state["fit"] is None:
            return state.update(fit=fit)
        gen = state["gen"] + 1
        key, k_fill = key_split(state["key"], 2)
        merged_pop = np.vstack([state["pop"], state["offspring"]])
        merged_fit = np.vstack([state["fit"], fit])
        progress = min(gen / self.t_max, 1.0)
        keep = rvea_select(merged_fit, state["vectors"], progress, self.alpha)
        if keep.size < self.pop_size:
            extra = keep[rand_int(k_fill, self.pop_size - keep.size, keep.size)]
            keep = np.concatenate([keep, extra])
        pop, fit = merged_pop[keep], merged_fit[keep]
        vectors = state["vectors"]
        if gen % self.adapt_every == 0:
            span = fit.max(axis=0) - fit.min(axis=0)
            if np.all(span > 0):
                scaled = self.ref.vectors * span
                vectors = scaled / np.linalg.norm(scaled, axis=1, keepdims=True)
        return state.update(pop=pop, fit=fit, vectors=vectors, gen=gen, key=key)
