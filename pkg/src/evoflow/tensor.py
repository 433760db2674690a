"""Dense float64 matrix helpers for populations, fitness and algorithm internals.

Matrices are 2-D ``numpy.ndarray`` of float64. Sampling draws from a
:class:`~evoflow.rng.Key` stream in row-major order, so the same key and shape
always produce the same matrix. Products use a fixed accumulation order
(see :func:`matmul`) instead of BLAS.
"""

from __future__ import annotations

import numpy as np

from evoflow import kernels
from evoflow.errors import InvalidArgument, NumericalDegeneracy, ShapeError
from evoflow.rng import Key

EIG_MAX_SWEEPS = 100
EIG_TOL = 1e-12
SYMMETRY_TOL = 1e-9


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def rand_uniform(key: Key, rows: int, cols: int, lo=0.0, hi=1.0) -> np.ndarray:
    """Uniform samples in ``[lo, hi)``; ``lo``/``hi`` may be scalars or per-column vectors."""
    lo_a = np.broadcast_to(np.asarray(lo, dtype=np.float64), (cols,))
    hi_a = np.broadcast_to(np.asarray(hi, dtype=np.float64), (cols,))
    if np.any(lo_a >= hi_a):
        raise InvalidArgument("rand_uniform requires lo < hi")
    u = key.uniform(rows * cols).reshape(rows, cols)
    x = lo_a + (hi_a - lo_a) * u
    # lo + (hi - lo) * u can round up to hi
    return np.minimum(x, np.nextafter(hi_a, lo_a))


def rand_normal(key: Key, rows: int, cols: int) -> np.ndarray:
    """Standard normals by the Box-Muller transform.

    Uniform pairs ``(u1, u2)`` are consecutive stream values;
    ``r = sqrt(-2 ln(1 - u1))`` and the pair yields ``r cos(2 pi u2)``,
    ``r sin(2 pi u2)`` in that order.
    """
    n = rows * cols
    pairs = (n + 1) // 2
    u = key.uniform(2 * pairs)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    phi = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(phi)
    z[1::2] = r * np.sin(phi)
    return z[:n].reshape(rows, cols)


def rand_int(key: Key, n: int, upper) -> np.ndarray:
    """Integers in ``[0, upper)`` (``upper`` scalar or per-draw array)."""
    u = key.uniform(n)
    return np.minimum((u * upper).astype(np.int64), np.asarray(upper) - 1)


def matmul(a, b) -> np.ndarray:
    """Matrix product, each entry summed over the inner index left to right."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return kernels.matmul(np.ascontiguousarray(a), np.ascontiguousarray(b))


def sym_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ascending eigenvalues ``w`` and orthonormal column eigenvectors
    ``V`` with ``a ~= V @ diag(w) @ V.T``.
    """
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"sym_eig needs a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("sym_eig input contains non-finite entries")
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise InvalidArgument("sym_eig input is not symmetric within 1e-9")
    w, v, _, converged = kernels.jacobi_eig(np.ascontiguousarray(a), EIG_MAX_SWEEPS, EIG_TOL)
    if not converged:
        raise NumericalDegeneracy(f"Jacobi did not converge in {EIG_MAX_SWEEPS} sweeps")
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def argsort(v, descending: bool = False) -> np.ndarray:
    """Stable argsort; ties keep their original order in both directions."""
    v = as_vector(v, "v")
    return np.argsort(-v if descending else v, kind="stable")


def inverse_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def take_rows(a, idx) -> np.ndarray:
    return as_matrix(a)[np.asarray(idx, dtype=np.int64)]


def clip(a, lo, hi) -> np.ndarray:
    return np.minimum(np.maximum(a, lo), hi)


def row_norms(a) -> np.ndarray:
    a = as_matrix(a)
    return np.sqrt(np.sum(a * a, axis=1))


def col_min(a) -> np.ndarray:
    return as_matrix(a).min(axis=0)


def col_max(a) -> np.ndarray:
    return as_matrix(a).max(axis=0)


def mean_rows(a) -> np.ndarray:
    return as_matrix(a).mean(axis=0)


def argmin(v) -> int:
    """Index of the smallest entry; the first one on ties."""
    return int(np.argmin(as_vector(v)))
