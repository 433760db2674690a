"""Name -> constructor registries used by declarative experiment configs."""

from __future__ import annotations

from typing import Any

from evoflow.algorithms.cmaes import CMAES
from evoflow.algorithms.de import DE
from evoflow.algorithms.ibea import IBEA
from evoflow.algorithms.moead import MOEAD
from evoflow.algorithms.nsga2 import NSGA2
from evoflow.algorithms.pso import PSO
from evoflow.algorithms.rvea import RVEA
from evoflow.errors import ConfigurationError
from evoflow.problems import DTLZ1, DTLZ2, ZDT1, ZDT2, Problem, SlowSphere, Sphere

ALGORITHMS = {
    "cmaes": CMAES,
    "de": DE,
    "ibea": IBEA,
    "moead": MOEAD,
    "nsga2": NSGA2,
    "pso": PSO,
    "rvea": RVEA,
}
MULTI_OBJECTIVE = {"ibea", "moead", "nsga2", "rvea"}

PROBLEMS = {
    "dtlz1": DTLZ1,
    "dtlz2": DTLZ2,
    "slow_sphere": SlowSphere,
    "sphere": Sphere,
    "zdt1": ZDT1,
    "zdt2": ZDT2,
}


def names(kind: str) -> list[str]:
    if kind == "algorithms":
        return sorted(ALGORITHMS)
    if kind == "problems":
        return sorted(PROBLEMS)
    raise ConfigurationError(f"unknown registry {kind!r}; expected 'algorithms' or 'problems'", "kind")


def _construct(cls, kwargs: dict[str, Any], field: str):
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc), field) from None


def make_problem(
    name: str, params: dict[str, Any] | None = None, dim: int | None = None, n_objectives: int | None = None
) -> Problem:
    if name not in PROBLEMS:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}", "problem.name")
    kwargs = dict(params or {})
    if dim is not None:
        kwargs.setdefault("dim", dim)
    if name.startswith("dtlz") and n_objectives is not None:
        kwargs.setdefault("n_objectives", n_objectives)
    problem = _construct(PROBLEMS[name], kwargs, "problem.params")
    if n_objectives is not None and problem.n_objectives != n_objectives:
        raise ConfigurationError(
            f"{name} has {problem.n_objectives} objectives, config asks for {n_objectives}", "n_objectives"
        )
    return problem


def make_algorithm(
    name: str, problem: Problem, params: dict[str, Any] | None = None, pop_size: int | None = None, t_max: int = 100
):
    """Build an algorithm bound to ``problem``'s bounds (and objective count for MO algorithms)."""
    if name not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}", "algorithm.name")
    kwargs = dict(params or {})
    kwargs["lo"], kwargs["hi"] = problem.lo, problem.hi
    if pop_size is not None:
        kwargs["pop_size"] = pop_size
    if name in MULTI_OBJECTIVE:
        if problem.n_objectives < 2:
            raise ConfigurationError(f"{name} is multi-objective but {problem.name} has one objective", "problem.name")
        kwargs["n_objectives"] = problem.n_objectives
    elif problem.n_objectives != 1:
        raise ConfigurationError(f"{name} is single-objective but {problem.name} is not", "problem.name")
    if name == "rvea":
        kwargs.setdefault("t_max", t_max)
    return _construct(ALGORITHMS[name], kwargs, "algorithm.params")
