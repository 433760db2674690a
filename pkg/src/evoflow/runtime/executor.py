"""Fork-join evaluation over a local worker pool."""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor

import numpy as np

from evoflow.errors import ContractViolation, WorkerError
from evoflow.runtime.sharding import ShardingPlan, slices_from_sizes, split_sizes
from evoflow.state import State


def _evaluate_shard(problem, state, rows):
    return problem.evaluate(state, rows)


class LocalExecutor:
    """Evaluates contiguous row shards in parallel and reassembles them in shard order.

    ``backend`` is ``"process"`` (fork-based pool; the default, since Python
    problems hold the GIL) or ``"thread"``. With one worker evaluation runs
    inline. Problems must be row-pure; the problem state handed back is the
    one returned by the first non-empty shard.
    """

    def __init__(self, workers: int = 1, backend: str = "process"):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        if backend not in ("process", "thread"):
            raise ValueError(f"unknown backend {backend!r}")
        self.workers = workers
        self.backend = backend
        self._pool: Executor | None = None

    def _get_pool(self) -> Executor:
        if self._pool is None:
            if self.backend == "thread":
                self._pool = ThreadPoolExecutor(max_workers=self.workers)
            else:
                self._pool = ProcessPoolExecutor(max_workers=self.workers, mp_context=mp.get_context("fork"))
        return self._pool

    def evaluate(self, problem, state: State, pop: np.ndarray, iteration: int | None = None, plan=None):
        slices = plan.row_slices if plan is not None else slices_from_sizes(split_sizes(pop.shape[0], self.workers))
        return parallel_evaluate(slices, problem, state, pop, self)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True, cancel_futures=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def parallel_evaluate(plan, problem, state: State, pop: np.ndarray, executor: LocalExecutor | None = None):
    """Evaluate ``pop`` shard by shard; bitwise equal to a single ``problem.evaluate`` call.

    ``plan`` is a :class:`ShardingPlan` or a list of ``(start, stop)`` row slices.
    """
    slices = plan.row_slices if isinstance(plan, ShardingPlan) else list(plan)
    if slices and (slices[0][0] != 0 or slices[-1][1] != pop.shape[0]):
        raise ContractViolation(f"plan covers rows {slices[0][0]}..{slices[-1][1]}, population has {pop.shape[0]}")
    busy = [(i, lo, hi) for i, (lo, hi) in enumerate(slices) if hi > lo]
    if executor is None or executor.workers == 1 or len(busy) <= 1:
        results = []
        for i, lo, hi in busy:
            try:
                results.append(problem.evaluate(state, pop[lo:hi]))
            except ContractViolation:
                raise
            except Exception as exc:
                raise WorkerError(i, exc) from exc
    else:
        pool = executor._get_pool()
        futures = [pool.submit(_evaluate_shard, problem, state, pop[lo:hi]) for _, lo, hi in busy]
        results = []
        for (i, _, _), fut in zip(busy, futures):
            try:
                results.append(fut.result())
            except ContractViolation:
                for f in futures:
                    f.cancel()
                raise
            except Exception as exc:
                for f in futures:
                    f.cancel()
                raise WorkerError(i, exc) from exc
    if not results:
        return np.empty((0, problem.n_objectives)), state
    fit = np.vstack([r[0] for r in results])
    return fit, results[0][1]
