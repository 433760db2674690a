"""The ask-evaluate-tell loop as a pure transition on the universal state."""

from __future__ import annotations

import numpy as np

from evoflow.errors import BudgetExhausted, ConfigurationError, ContractViolation
from evoflow.rng import Key, key_new
from evoflow.runtime.executor import LocalExecutor
from evoflow.runtime.monitor import Monitor
from evoflow.runtime.sharding import ShardingPlan, analyze
from evoflow.state import ROOT, ModuleNode, State, state_extract, state_init, state_merge

ALGORITHM = (ROOT, "algorithm")
PROBLEM = (ROOT, "problem")
MONITOR = (ROOT, "monitor")


class Workflow:
    """Wires an algorithm, a problem and a monitor into one state machine.

    ``init`` builds the universal state (root slot ``t`` plus one child per
    module); ``step`` runs one iteration: ask, clip a copy into the problem
    bounds, evaluate through the evaluator, record population and fitness,
    tell. Evaluation is delegated so the same workflow runs inline, on a
    local pool or across SPMD nodes.
    """

    def __init__(self, algorithm, problem, monitor: Monitor | None = None, t_max: int = 100, evaluator=None):
        if t_max < 0:
            raise ConfigurationError("t_max must be >= 0", "t_max")
        if algorithm.dim != problem.dim:
            raise ConfigurationError(
                f"algorithm dimension {algorithm.dim} does not match problem dimension {problem.dim}", "dim"
            )
        self.algorithm = algorithm
        self.problem = problem
        self.monitor = monitor if monitor is not None else Monitor()
        self.t_max = int(t_max)
        self.evaluator = evaluator if evaluator is not None else LocalExecutor(1)
        self.plan: ShardingPlan | None = None

    def module_tree(self) -> ModuleNode:
        return ModuleNode(
            ROOT,
            lambda key: {"t": 0},
            [
                ModuleNode("algorithm", self.algorithm.setup),
                ModuleNode("problem", self.problem.setup),
                ModuleNode("monitor", self.monitor.setup),
            ],
        )

    def init(self, seed: int | Key = 0) -> State:
        key = seed if isinstance(seed, Key) else key_new(seed)
        return state_init(self.module_tree(), key)

    def enable_multi_workers(self, workers: int, backend: str = "process") -> ShardingPlan:
        """Analyze the workflow for ``workers`` local workers and switch to a pooled executor."""
        self.plan = analyze(self, workers)
        if not isinstance(self.evaluator, LocalExecutor) or self.evaluator.workers != workers:
            self.close_evaluator()
            self.evaluator = LocalExecutor(workers, backend)
        return self.plan

    def step(self, state: State) -> State:
        t = state["t"]
        if t >= self.t_max:
            raise BudgetExhausted(f"generation budget of {self.t_max} exhausted")

        a_state = state_extract(state, ALGORITHM)
        pop, a_state = self.algorithm.ask(a_state)
        pop = np.asarray(pop, dtype=np.float64)
        if pop.ndim != 2 or pop.shape[1] != self.problem.dim:
            raise ContractViolation(f"ask returned shape {pop.shape}", "algorithm")
        eval_pop = np.minimum(np.maximum(pop, self.problem.lo), self.problem.hi)

        p_state = state_extract(state, PROBLEM)
        fit, p_state = self.evaluator.evaluate(self.problem, p_state, eval_pop, iteration=t, plan=self.plan)
        if fit.ndim != 2 or fit.shape != (pop.shape[0], self.problem.n_objectives):
            raise ContractViolation(
                f"evaluate returned shape {fit.shape}, expected {(pop.shape[0], self.problem.n_objectives)}",
                "problem",
            )

        m_state = state_extract(state, MONITOR)
        m_state = self.monitor.record_pop(m_state, eval_pop, t)
        m_state = self.monitor.record_fit(m_state, fit, t)

        a_state = self.algorithm.tell(a_state, fit)

        state = state_merge(state, ALGORITHM, a_state)
        state = state_merge(state, PROBLEM, p_state)
        state = state_merge(state, MONITOR, m_state)
        return state.update(t=t + 1)

    def run(self, state: State, steps: int | None = None) -> State:
        steps = self.t_max - state["t"] if steps is None else steps
        for _ in range(steps):
            state = self.step(state)
        return state

    def close_evaluator(self) -> None:
        closer = getattr(self.evaluator, "close", None)
        if closer is not None:
            closer()

    def close(self) -> None:
        try:
            self.monitor.close()
        finally:
            self.close_evaluator()
