"""Covariance matrix adaptation evolution strategy (rank-one + rank-mu update)."""

from __future__ import annotations

import math

import numpy as np

from evoflow.algorithms.base import Algorithm, require
from evoflow.errors import ContractViolation, NumericalDegeneracy
from evoflow.rng import key_split
from evoflow.tensor import matmul, rand_normal, rand_uniform, sym_eig

MIN_EIGENVALUE = 1e-20


def recombination_weights(mu: int) -> np.ndarray:
    """``ln(mu + 1/2) - ln(i)`` for ``i = 1..mu``, normalized to sum to one."""
    raw = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    return raw / raw.sum()


class CMAES(Algorithm):
    """CMA-ES with cumulative step-size adaptation.

    Candidates are sampled unbounded as ``m + sigma * B diag(d) z``; the
    workflow clips a copy for evaluation. The eigendecomposition of ``C`` is
    refreshed every ``max(1, floor(1 / (c1 + cmu) / D / 10))`` generations.
    """

    name = "cmaes"

    def __init__(self, lo, hi, pop_size: int | None = None, sigma0: float | None = None):
        d = np.asarray(lo).size
        if pop_size is None:
            pop_size = 4 + int(3 * math.log(d))
        super().__init__(lo, hi, pop_size)
        require(self.pop_size >= 2, "CMA-ES needs pop_size >= 2", "pop_size")
        n = self.dim
        lam = self.pop_size
        self.mu = lam // 2
        self.weights = recombination_weights(self.mu)
        self.mu_eff = 1.0 / float(np.sum(self.weights**2))
        mu_eff = self.mu_eff
        self.sigma0 = float(sigma0) if sigma0 is not None else 0.3 * float(np.mean(self.hi - self.lo))
        require(self.sigma0 > 0, "sigma0 must be positive", "algorithm.params.sigma0")
        self.c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
        self.c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
        self.c1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
        self.c_mu = min(1.0 - self.c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))
        self.d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + self.c_sigma
        self.chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        self.eigen_every = max(1, int(1.0 / (self.c1 + self.c_mu) / n / 10.0))

    def setup(self, key):
        k_mean, k_next = key_split(key, 2)
        n = self.dim
        mean = rand_uniform(k_mean, 1, n, self.lo, self.hi)[0]
        return {
            "mean": mean,
            "sigma": self.sigma0,
            "C": np.eye(n),
            "B": np.eye(n),
            "D": np.ones(n),
            "p_sigma": np.zeros(n),
            "p_c": np.zeros(n),
            "y": np.zeros((self.pop_size, n)),
            "gen": 0,
            "eigen_gen": 0,
            "key": k_next,
        }

    def ask(self, state):
        key, k = key_split(state["key"], 2)
        z = rand_normal(k, self.pop_size, self.dim)
        y = matmul(z * state["D"], state["B"].T)
        x = state["mean"] + state["sigma"] * y
        return x, state.update(y=y, key=key)

    def tell(self, state, fitness):
        fit = self._fitness(fitness, self.pop_size, 1)[:, 0]
        if not np.all(np.isfinite(fit)):
            raise ContractViolation("CMA-ES received non-finite fitness", self.name)
        n = self.dim
        gen = state["gen"] + 1
        order = np.argsort(fit, kind="stable")[: self.mu]
        y_sel = state["y"][order]
        w = self.weights
        y_w = matmul(w[None, :], y_sel)[0]
        sigma = state["sigma"]
        mean = state["mean"] + sigma * y_w

        B, D = state["B"], state["D"]
        inv_sqrt_c_yw = matmul(B, ((matmul(B.T, y_w[:, None])[:, 0]) / D)[:, None])[:, 0]
        cs = self.c_sigma
        p_sigma = (1.0 - cs) * state["p_sigma"] + math.sqrt(cs * (2.0 - cs) * self.mu_eff) * inv_sqrt_c_yw
        ps_norm = float(np.sqrt(np.sum(p_sigma * p_sigma)))
        h_sigma = ps_norm / math.sqrt(1.0 - (1.0 - cs) ** (2 * gen)) < (1.4 + 2.0 / (n + 1.0)) * self.chi_n
        cc = self.c_c
        p_c = (1.0 - cc) * state["p_c"]
        if h_sigma:
            p_c = p_c + math.sqrt(cc * (2.0 - cc) * self.mu_eff) * y_w

        rank_one = matmul(p_c[:, None], p_c[None, :])
        if not h_sigma:
            rank_one = rank_one + cc * (2.0 - cc) * state["C"]
        rank_mu = matmul((y_sel * w[:, None]).T, y_sel)
        C = (1.0 - self.c1 - self.c_mu) * state["C"] + self.c1 * rank_one + self.c_mu * rank_mu
        C = 0.5 * (C + C.T)

        sigma = sigma * math.exp((cs / self.d_sigma) * (ps_norm / self.chi_n - 1.0))

        eigen_gen = state["eigen_gen"]
        if gen - eigen_gen >= self.eigen_every:
            vals, B = sym_eig(C)
            if vals[0] < MIN_EIGENVALUE:
                raise NumericalDegeneracy(
                    f"covariance lost positive definiteness (smallest eigenvalue {vals[0]:.3e})", gen
                )
            D = np.sqrt(vals)
            eigen_gen = gen

        return state.update(
            mean=mean, sigma=sigma, C=C, B=B, D=D, p_sigma=p_sigma, p_c=p_c, gen=gen, eigen_gen=eigen_gen
        )
