"""Small drivers shared by the algorithm and acceptance tests."""

from __future__ import annotations

import hashlib
import threading

import numpy as np

from evoflow.rng import key_new
from evoflow.runtime.monitor import Monitor
from evoflow.runtime.spmd import ClusterConfig, SpmdComm, free_port
from evoflow.runtime.workflow import ALGORITHM, MONITOR, Workflow
from evoflow.state import State, state_extract


def bare_state(algorithm, seed: int = 0) -> State:
    return State("algorithm", algorithm.setup(key_new(seed)))


def drive(algorithm, problem, steps: int, seed: int = 0, on_step=None) -> State:
    """Plain ask/evaluate/tell loop without the workflow machinery."""
    state = bare_state(algorithm, seed)
    p_state = State("problem")
    for t in range(steps):
        pop, state = algorithm.ask(state)
        pop = np.minimum(np.maximum(pop, problem.lo), problem.hi)
        fit, p_state = problem.evaluate(p_state, pop)
        state = algorithm.tell(state, fit)
        if on_step is not None:
            on_step(t, state, fit)
    return state


class TrajectoryMonitor(Monitor):
    """Collects the per-iteration best-so-far in memory."""

    def __init__(self):
        self.best: list[float] = []

    def record_fit(self, state, fit, iteration):
        state = super().record_fit(state, fit, iteration)
        self.best.append(state["best"])
        return state


def run_workflow(algorithm, problem, t_max: int, seed: int = 0, workers: int = 1, backend: str = "thread"):
    monitor = TrajectoryMonitor()
    wf = Workflow(algorithm, problem, monitor, t_max)
    if workers > 1:
        wf.enable_multi_workers(workers, backend)
    try:
        state = wf.run(wf.init(seed))
    finally:
        wf.close()
    return state, monitor.best


def final_best(state) -> float:
    return float(state_extract(state, MONITOR)["best"])


def final_algorithm(state) -> State:
    return state_extract(state, ALGORITHM)


# --- SPMD nodes as threads ---------------------------------------------------------

HASH = hashlib.sha256(b"config").digest()


def cluster(node, world, port):
    role = "coordinator" if node == 0 else "worker"
    return ClusterConfig(role, node, world, "127.0.0.1", port)


def run_nodes(world, body, hashes=None, timeout=5.0):
    """Run ``body(i, comm)`` on ``world`` threads (one per node); return per-node results or exceptions."""
    port = free_port()
    results = [None] * world

    def node(i):
        t = timeout[i] if isinstance(timeout, (list, tuple)) else timeout
        comm = SpmdComm(cluster(i, world, port), (hashes or [HASH] * world)[i], timeout=t)
        try:
            comm.open()
            results[i] = body(i, comm)
        except BaseException as exc:
            results[i] = exc
        finally:
            comm.close()

    threads = [threading.Thread(target=node, args=(i,)) for i in range(world)]
    threads[0].start()
    for t in threads[1:]:
        t.start()
    for t in threads:
        t.join(30)
    return results
