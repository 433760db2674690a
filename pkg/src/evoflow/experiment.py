"""Declarative experiments: config parsing, single/SPMD runs and scaling sweeps."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from evoflow import kernels
from evoflow.errors import ConfigurationError, ProtocolError
from evoflow.metrics import igd
from evoflow.registry import ALGORITHMS, PROBLEMS, make_algorithm, make_problem
from evoflow.runtime.executor import LocalExecutor
from evoflow.runtime.monitor import AsyncMonitor, CsvSink, Monitor
from evoflow.runtime.spmd import ClusterConfig, SpmdComm, SpmdEvaluator
from evoflow.runtime.workflow import MONITOR, Workflow
from evoflow.state import state_extract

REFERENCE_POINTS = 1000
HV_REF = 1.1
SWEEP_WARMUP = 3
SWEEP_TIMED = 20
SWEEP_FIXED = 100
SWEEP_CAPS = {"dim": 4096, "pop": 65536}
OUTPUT_ENV = "EVOFLOW_OUTPUT_DIR"

# Fields that may differ between SPMD nodes without changing the computation.
_NODE_LOCAL = ("workers", "executor", "output_dir", "snapshot", "wall_clock")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    problem: str
    seed: int
    t_max: int
    algorithm_params: dict[str, Any] = field(default_factory=dict)
    problem_params: dict[str, Any] = field(default_factory=dict)
    pop_size: int | None = None
    dim: int | None = None
    n_objectives: int | None = None
    workers: int = 1
    executor: str = "process"
    output_dir: str = "runs/default"
    snapshot: bool = False
    wall_clock: bool = True

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> ExperimentConfig:
        """Validate a parsed JSON document; every failure names the offending field."""
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a JSON object", "<root>")
        known = {"algorithm", "problem", "seed", "t_max", "pop_size", "dim", "n_objectives", *_NODE_LOCAL}
        for k in raw:
            if k not in known:
                raise ConfigurationError("unknown field", k)
        for k in ("algorithm", "problem", "seed", "t_max"):
            if k not in raw:
                raise ConfigurationError("field is required", k)

        alg_name, alg_params = _named(raw["algorithm"], "algorithm")
        prob_name, prob_params = _named(raw["problem"], "problem")
        if alg_name not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {alg_name!r}; choose from {sorted(ALGORITHMS)}", "algorithm.name")
        if prob_name not in PROBLEMS:
            raise ConfigurationError(f"unknown problem {prob_name!r}; choose from {sorted(PROBLEMS)}", "problem.name")

        cfg = cls(
            algorithm=alg_name,
            problem=prob_name,
            seed=_int(raw, "seed", minimum=0),
            t_max=_int(raw, "t_max", minimum=0),
            algorithm_params=alg_params,
            problem_params=prob_params,
            pop_size=_int(raw, "pop_size", minimum=1, optional=True),
            dim=_int(raw, "dim", minimum=1, optional=True),
            n_objectives=_int(raw, "n_objectives", minimum=1, optional=True),
            workers=_int(raw, "workers", minimum=1, optional=True) or 1,
            executor=raw.get("executor", "process"),
            output_dir=raw.get("output_dir", "runs/default"),
            snapshot=_bool(raw, "snapshot", False),
            wall_clock=_bool(raw, "wall_clock", True),
        )
        if cfg.executor not in ("process", "thread"):
            raise ConfigurationError("must be 'process' or 'thread'", "executor")
        if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
            raise ConfigurationError("must be a non-empty string", "output_dir")
        return cfg

    @classmethod
    def load(cls, path: str) -> ExperimentConfig:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc.strerror}", "path") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "path") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "algorithm": {"name": self.algorithm, "params": dict(self.algorithm_params)},
            "problem": {"name": self.problem, "params": dict(self.problem_params)},
            "seed": self.seed,
            "t_max": self.t_max,
        }
        for k in ("pop_size", "dim", "n_objectives"):
            if getattr(self, k) is not None:
                out[k] = getattr(self, k)
        for k in _NODE_LOCAL:
            out[k] = getattr(self, k)
        return out

    def canonical(self) -> bytes:
        shared = {k: v for k, v in self.to_dict().items() if k not in _NODE_LOCAL}
        return json.dumps(shared, sort_keys=True, separators=(",", ":")).encode()

    def config_hash(self) -> bytes:
        """SHA-256 of the canonical JSON of every field that affects the computation."""
        return hashlib.sha256(self.canonical()).digest()

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


def _named(value, field_name: str) -> tuple[str, dict[str, Any]]:
    if isinstance(value, str):
        return value, {}
    if not isinstance(value, dict) or not isinstance(value.get("name"), str):
        raise ConfigurationError("expected a name or {'name': ..., 'params': {...}}", field_name)
    extra = set(value) - {"name", "params"}
    if extra:
        raise ConfigurationError("unknown field", f"{field_name}.{sorted(extra)[0]}")
    params = value.get("params", {})
    if not isinstance(params, dict):
        raise ConfigurationError("must be an object", f"{field_name}.params")
    return value["name"], dict(params)


def _int(raw, name, minimum, optional=False):
    value = raw.get(name)
    if value is None:
        if optional:
            return None
        raise ConfigurationError("field is required", name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"must be an integer, got {value!r}", name)
    if value < minimum:
        raise ConfigurationError(f"must be >= {minimum}, got {value}", name)
    return value


def _bool(raw, name, default):
    value = raw.get(name, default)
    if not isinstance(value, bool):
        raise ConfigurationError(f"must be true or false, got {value!r}", name)
    return value


def build(cfg: ExperimentConfig, t_max: int | None = None):
    """Instantiate ``(algorithm, problem)`` from a config."""
    problem = make_problem(cfg.problem, cfg.problem_params, cfg.dim, cfg.n_objectives)
    algorithm = make_algorithm(
        cfg.algorithm, problem, cfg.algorithm_params, cfg.pop_size, cfg.t_max if t_max is None else t_max
    )
    return algorithm, problem


def reference_front(problem) -> np.ndarray | None:
    return problem.pareto_front(REFERENCE_POINTS) if problem.has_front else None


def _state_fingerprint(digest: bytes) -> np.ndarray:
    return np.frombuffer(digest, dtype=np.uint8).astype(np.float64)[None, :]


def run_experiment(cfg: ExperimentConfig, cluster: ClusterConfig | None = None, timeout: float = 30.0) -> dict:
    """Run ``cfg`` to completion and write the run artifacts.

    Node 0 (or a single process) writes into ``cfg.output_dir``; SPMD node
    ``k > 0`` writes into ``<output_dir>/node<k>``. After the last iteration
    all nodes exchange a digest of their final state and abort if any differ.
    Returns the metadata dictionary that is also written to ``metadata.json``.
    """
    cluster = cluster or ClusterConfig()
    out_dir = cfg.output_dir if cluster.node_id == 0 else os.path.join(cfg.output_dir, f"node{cluster.node_id}")
    algorithm, problem = build(cfg)
    front = reference_front(problem)
    sink = CsvSink(
        out_dir,
        problem.n_objectives,
        reference_front=front,
        hv_ref_point=np.full(2, HV_REF) if problem.n_objectives == 2 and front is not None else None,
        snapshot=cfg.snapshot,
        wall_clock=cfg.wall_clock,
    )
    monitor = AsyncMonitor(sink)
    local = LocalExecutor(cfg.workers, cfg.executor)
    comm = None
    if cluster.world_size > 1:
        comm = SpmdComm(cluster, cfg.config_hash(), timeout=timeout)
        evaluator = SpmdEvaluator(comm, local)
    else:
        evaluator = local
    workflow = Workflow(algorithm, problem, monitor, cfg.t_max, evaluator)
    if cluster.world_size == 1 and cfg.workers > 1:
        workflow.enable_multi_workers(cfg.workers, cfg.executor)

    start = time.perf_counter()
    try:
        if comm is not None:
            comm.open()
        state = workflow.init(cfg.seed)
        state = workflow.run(state)
        digest = state.digest()
        if comm is not None:
            prints = comm.all_gather(_state_fingerprint(digest), cfg.t_max, row_offset=cluster.node_id)
            if not np.all(prints == prints[0]):
                raise ProtocolError("final states differ across nodes")
    except BaseException:
        try:
            workflow.close()
        except Exception:
            pass
        if comm is not None:
            comm.close()
        raise
    wall = time.perf_counter() - start
    workflow.close()
    if comm is not None:
        comm.close()

    m_state = state_extract(state, MONITOR)
    last_fit = m_state["last_fit"]
    meta = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash().hex(),
        "effective_pop_size": algorithm.pop_size,
        "kernel_backend": kernels.BACKEND,
        "node_id": cluster.node_id,
        "world_size": cluster.world_size,
        "wall_time_s": wall,
        "final_best": float(m_state["best"]) if problem.n_objectives == 1 and cfg.t_max else None,
        "final_igd": igd(last_fit, front) if front is not None and last_fit is not None else None,
        "state_digest": digest.hex(),
    }
    with open(os.path.join(out_dir, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


def spmd_run(cluster: ClusterConfig, cfg: ExperimentConfig, timeout: float = 30.0) -> dict:
    return run_experiment(cfg, cluster, timeout)


def sweep(cfg: ExperimentConfig, axis: str, values: list[int]) -> list[tuple[int, float, float]]:
    """Mean and std of per-iteration wall time (ms) for each value of ``axis``.

    The other axis is fixed at 100. Each point runs 3 untimed warm-up
    iterations followed by 20 timed ones, without a monitor.
    """
    if axis not in SWEEP_CAPS:
        raise ConfigurationError(f"axis must be 'dim' or 'pop', got {axis!r}", "axis")
    if not values:
        raise ConfigurationError("at least one value is required", "values")
    if any(v < 1 for v in values):
        raise ConfigurationError("values must be positive", "values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("values must be strictly ascending", "values")
    if values[-1] > SWEEP_CAPS[axis]:
        raise ConfigurationError(f"{values[-1]} exceeds the {axis} cap of {SWEEP_CAPS[axis]}", "values")

    steps = SWEEP_WARMUP + SWEEP_TIMED
    rows = []
    for v in values:
        dim, pop = (v, SWEEP_FIXED) if axis == "dim" else (SWEEP_FIXED, v)
        point = cfg.replace(dim=dim, pop_size=pop, t_max=steps)
        algorithm, problem = build(point)
        workflow = Workflow(algorithm, problem, Monitor(), steps, LocalExecutor(1))
        state = workflow.init(cfg.seed)
        for _ in range(SWEEP_WARMUP):
            state = workflow.step(state)
        times = np.empty(SWEEP_TIMED)
        for i in range(SWEEP_TIMED):
            t0 = time.perf_counter()
            state = workflow.step(state)
            times[i] = (time.perf_counter() - t0) * 1000.0
        workflow.close()
        rows.append((v, float(times.mean()), float(times.std())))
    return rows


def sweep_csv(rows) -> str:
    lines = ["axis_value,mean_iter_ms,std_iter_ms"]
    lines += [f"{v},{mean:.6f},{std:.6f}" for v, mean, std in rows]
    return "\n".join(lines) + "\n"
