"""Pure-numpy kernels.

Reference implementation of the hot loops. ``_ckernels.pyx`` mirrors every
function here operation for operation, so both backends return bit-identical
results (the extension is compiled without FMA contraction).
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def _fmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def random_bits(hi: int, lo: int, start: int, n: int) -> np.ndarray:
    """Counter-mode block ``fmix(hi ^ fmix(lo + (i + 1) * GAMMA))`` for i in [start, start + n)."""
    with np.errstate(over="ignore"):
        counters = np.arange(n, dtype=np.uint64) + np.uint64((start + 1) & MASK64)
        z = np.uint64(lo) + counters * np.uint64(GAMMA)
        return _fmix(np.uint64(hi) ^ _fmix(z))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    # accumulate over the inner index left to right, one rank-1 term at a time
    for j in range(k):
        out += a[:, j : j + 1] * b[j : j + 1, :]
    return out


def _rotation(app: float, aqq: float, apq: float) -> tuple[float, float]:
    theta = (aqq - app) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    return float(c), float(t * c)


def jacobi_eig(a: np.ndarray, max_sweeps: int, tol: float):
    """Cyclic Jacobi on a symmetric matrix.

    Returns ``(diagonal, vectors, sweeps_used, converged)``; eigenvalues are
    not sorted here.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.max(np.abs(a))) if n else 0.0
    if scale == 0.0:
        return np.diag(a).copy(), v, 0, True
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            row_max = float(np.max(np.abs(a[p, p + 1 :])))
            if row_max > off:
                off = row_max
        if off <= tol * scale:
            return np.diag(a).copy(), v, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                c, s = _rotation(a[p, p], a[q, q], apq)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, max_sweeps, False


def nd_rank(fit: np.ndarray) -> np.ndarray:
    """Front index per row under Pareto dominance (minimization)."""
    n = fit.shape[0]
    le = np.all(fit[:, None, :] <= fit[None, :, :], axis=2)
    lt = np.any(fit[:, None, :] < fit[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0).astype(np.int64)
    rank = np.full(n, -1, dtype=np.int64)
    current = 0
    assigned = 0
    while assigned < n:
        front = np.flatnonzero((count == 0) & (rank < 0))
        rank[front] = current
        assigned += front.size
        count -= dom[front].sum(axis=0)
        current += 1
    return rank
