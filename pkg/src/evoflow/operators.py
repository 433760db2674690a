"""Reproduction, selection and multi-objective utilities shared by the algorithms.

All objectives are minimized. Stochastic operators are pure functions of a
:class:`~evoflow.rng.Key` and their inputs; random draws are taken in
row-major order so results never depend on how work is partitioned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from evoflow import kernels
from evoflow.errors import ConfigurationError, InvalidArgument, ShapeError
from evoflow.rng import Key, key_split
from evoflow.tensor import as_matrix, as_vector, clip, rand_int

MAX_REFERENCE_VECTORS = 10**6


@dataclass(frozen=True)
class DominanceRanking:
    rank: np.ndarray
    fronts: list[np.ndarray]


@dataclass(frozen=True)
class ReferenceVectorSet:
    vectors: np.ndarray
    lattice: np.ndarray
    h: int


def dominates(a, b) -> bool:
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"objective vectors differ in length: {a.size} vs {b.size}")
    return bool(np.all(a <= b) and np.any(a < b))


def non_dominated_sort(fit) -> DominanceRanking:
    """Fast non-dominated sorting. Fronts list their members in ascending index order."""
    fit = np.ascontiguousarray(as_matrix(fit, "fitness"))
    if fit.shape[0] == 0:
        raise InvalidArgument("cannot sort an empty population")
    rank = kernels.nd_rank(fit)
    fronts = [np.flatnonzero(rank == r) for r in range(int(rank.max()) + 1)]
    return DominanceRanking(rank, fronts)


def crowding_distance(front_fit) -> np.ndarray:
    f = as_matrix(front_fit, "front")
    n, m = f.shape
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for j in range(m):
        order = np.argsort(f[:, j], kind="stable")
        col = f[order, j]
        span = col[-1] - col[0]
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
    return dist


def sbx_crossover(
    key: Key, parents, eta_c: float = 20.0, p_c: float = 1.0, lo=None, hi=None, p_var: float = 0.5
) -> np.ndarray:
    """Simulated binary crossover of consecutive row pairs ``(0, 1), (2, 3), ...``.

    A pair crosses with probability ``p_c``; inside a crossing pair each
    variable recombines with probability ``p_var`` and the two child values
    are then exchanged with probability 1/2. Spread factor:
    ``beta = (2u)^(1/(eta+1))`` for ``u <= 1/2``, else ``(1/(2(1-u)))^(1/(eta+1))``.
    """
    parents = as_matrix(parents, "parents")
    n, d = parents.shape
    if n % 2:
        raise InvalidArgument(f"SBX needs an even number of parents, got {n}")
    if eta_c <= 0 or not 0.0 <= p_c <= 1.0 or not 0.0 <= p_var <= 1.0:
        raise InvalidArgument("SBX needs eta_c > 0 and probabilities in [0, 1]")
    half = n // 2
    k_pair, k_u, k_var, k_swap = key_split(key, 4)
    p1 = parents[0::2]
    p2 = parents[1::2]
    cross = k_pair.uniform(half) < p_c
    u = k_u.uniform(half * d).reshape(half, d)
    var = k_var.uniform(half * d).reshape(half, d) < p_var
    swap = k_swap.uniform(half * d).reshape(half, d) < 0.5
    expo = 1.0 / (eta_c + 1.0)
    with np.errstate(divide="ignore"):
        beta = np.where(u <= 0.5, (2.0 * u) ** expo, (1.0 / (2.0 * (1.0 - u))) ** expo)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    active = cross[:, None] & var & (p1 != p2)
    c1, c2 = np.where(swap, c2, c1), np.where(swap, c1, c2)
    children = np.empty_like(parents)
    children[0::2] = np.where(active, c1, p1)
    children[1::2] = np.where(active, c2, p2)
    if lo is not None and hi is not None:
        children = clip(children, lo, hi)
    return children


def polynomial_mutation(key: Key, pop, eta_m: float = 20.0, p_m: float | None = None, lo=0.0, hi=1.0) -> np.ndarray:
    """Bounded polynomial mutation; each variable mutates with probability ``p_m`` (default 1/D)."""
    pop = as_matrix(pop, "population")
    n, d = pop.shape
    if p_m is None:
        p_m = 1.0 / d
    if eta_m <= 0 or not 0.0 <= p_m <= 1.0:
        raise InvalidArgument("polynomial mutation needs eta_m > 0 and 0 <= p_m <= 1")
    if p_m == 0.0:
        return pop.copy()
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (d,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (d,))
    k_mask, k_u = key_split(key, 2)
    mask = k_mask.uniform(n * d).reshape(n, d) < p_m
    u = k_u.uniform(n * d).reshape(n, d)
    span = hi - lo
    d1 = (pop - lo) / span
    d2 = (hi - pop) / span
    expo = 1.0 / (eta_m + 1.0)
    low = u < 0.5
    val_lo = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta_m + 1.0)
    val_hi = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta_m + 1.0)
    delta = np.where(low, np.maximum(val_lo, 0.0) ** expo - 1.0, 1.0 - np.maximum(val_hi, 0.0) ** expo)
    out = np.where(mask, pop + delta * span, pop)
    return clip(out, lo, hi)


def distinct_indices_batch(key: Key, pool: int, n: int, exclude=None, rows: int = 1) -> np.ndarray:
    """``rows`` independent draws of ``n`` distinct indices from ``range(pool)``.

    ``exclude`` (scalar or one index per row) is never drawn. Each step picks
    the r-th still-available index in ascending order, so every draw is a
    uniform sample without replacement.
    """
    banned = 0 if exclude is None else 1
    if n + banned > pool:
        raise InvalidArgument(f"cannot draw {n} distinct indices from a pool of {pool}")
    taken = np.empty((rows, n + banned), dtype=np.int64)
    if banned:
        taken[:, 0] = np.broadcast_to(np.asarray(exclude, dtype=np.int64), (rows,))
    keys = key_split(key, n) if n else []
    for j, k in enumerate(keys):
        used = j + banned
        r = rand_int(k, rows, pool - used)
        ordered = np.sort(taken[:, :used], axis=1)
        for c in range(used):
            r = r + (r >= ordered[:, c])
        taken[:, used] = r
    return taken[:, banned:]


def distinct_indices(key: Key, pool: int, n: int, exclude: int | None = None) -> np.ndarray:
    if n >= pool:
        raise InvalidArgument(f"need n < pool, got n={n}, pool={pool}")
    return distinct_indices_batch(key, pool, n, exclude, rows=1)[0]


def tournament_select(key: Key, scores, n_picks: int, arity: int = 2) -> np.ndarray:
    """Pick ``n_picks`` winners; each is the lowest score among ``arity`` distinct random entrants.

    Equal scores go to the lower index.
    """
    scores = as_vector(scores, "scores")
    if scores.size == 0:
        raise InvalidArgument("tournament over an empty population")
    if arity < 1:
        raise InvalidArgument("tournament arity must be >= 1")
    arity = min(arity, scores.size)
    entrants = distinct_indices_batch(key, scores.size, arity, rows=n_picks)
    s = scores[entrants]
    best = s.min(axis=1, keepdims=True)
    return np.where(s == best, entrants, scores.size).min(axis=1)


def tchebycheff(f, weights, z_star) -> np.ndarray | float:
    """``max_i w_i |f_i - z*_i|`` over the last axis."""
    f = np.asarray(f, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    z_star = np.asarray(z_star, dtype=np.float64)
    if f.shape[-1] != weights.shape[-1] or f.shape[-1] != z_star.shape[-1]:
        raise ShapeError("tchebycheff inputs differ in objective count")
    if np.any(weights < 0):
        raise InvalidArgument("tchebycheff weights must be non-negative")
    g = np.max(weights * np.abs(f - z_star), axis=-1)
    return float(g) if np.ndim(g) == 0 else g


def eps_indicator(a, b) -> np.ndarray | float:
    """Additive epsilon indicator ``max_i (a_i - b_i)`` over the last axis."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError("eps_indicator inputs differ in objective count")
    v = np.max(a - b, axis=-1)
    return float(v) if np.ndim(v) == 0 else v


def reference_vectors(m: int, h: int) -> ReferenceVectorSet:
    """Simplex-lattice weights with resolution ``h``, plus their unit-norm versions."""
    if m < 2 or h < 1:
        raise ConfigurationError(f"reference vectors need m >= 2 and h >= 1, got m={m}, h={h}")
    count = math.comb(h + m - 1, m - 1)
    if count > MAX_REFERENCE_VECTORS:
        raise ConfigurationError(f"{count} reference vectors exceed the limit of {MAX_REFERENCE_VECTORS}")
    rows = []
    for bars in itertools.combinations(range(h + m - 1), m - 1):
        edges = (-1, *bars, h + m - 1)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    lattice = np.asarray(rows, dtype=np.float64) / h
    vectors = lattice / np.linalg.norm(lattice, axis=1, keepdims=True)
    return ReferenceVectorSet(vectors, lattice, h)


def lattice_resolution(m: int, budget: int) -> int:
    """Largest ``h`` whose lattice has at most ``budget`` points (at least 1)."""
    h = 1
    while math.comb(h + 1 + m - 1, m - 1) <= budget:
        h += 1
    return h
