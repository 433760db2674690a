"""Regenerate the frozen reference runs behind the convergence thresholds.

Runs each convergence setting over seeds 0..9 and writes the median and
maximum final value to ``tests/data/reference_runs.json``. For the
multi-objective settings it also records the IGD of an ideal set of the
same size (the discretisation floor no finite population can beat).

    python benchmarks/reference_runs.py
"""

from __future__ import annotations

import json
import pathlib
import sys

import numpy as np

from evoflow.algorithms import CMAES, DE, MOEAD, NSGA2, PSO, RVEA
from evoflow.metrics import igd
from evoflow.operators import reference_vectors
from evoflow.problems import DTLZ2, ZDT1, Sphere
from evoflow.runtime.monitor import Monitor
from evoflow.runtime.workflow import ALGORITHM, MONITOR, Workflow
from evoflow.state import state_extract

SEEDS = range(10)
OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "reference_runs.json"


def settings():
    sphere, zdt, dtlz = Sphere(10), ZDT1(30), DTLZ2(3)
    zdt_front, dtlz_front = zdt.pareto_front(1000), dtlz.pareto_front(1000)
    v = reference_vectors(3, 13).vectors
    return {
        "pso": (lambda: PSO(sphere.lo, sphere.hi, pop_size=100), sphere, 500, None, 1e-4, 10, None),
        "cmaes": (lambda: CMAES(sphere.lo, sphere.hi), sphere, 500, None, 1e-6, 10, None),
        "de": (lambda: DE(sphere.lo, sphere.hi, pop_size=100), sphere, 500, None, 1e-2, 10, None),
        "nsga2": (
            lambda: NSGA2(zdt.lo, zdt.hi, pop_size=100), zdt, 250, zdt_front, 0.01, 3,
            igd(zdt.pareto_front(100), zdt_front),
        ),
        "moead": (
            lambda: MOEAD(zdt.lo, zdt.hi, pop_size=100), zdt, 250, zdt_front, 0.02, 3,
            igd(zdt.pareto_front(100), zdt_front),
        ),
        "rvea": (
            lambda: RVEA(dtlz.lo, dtlz.hi, pop_size=105, t_max=200), dtlz, 200, dtlz_front, 0.08, 3,
            igd(v / np.linalg.norm(v, axis=1, keepdims=True), dtlz_front),
        ),
    }


def final_value(make, problem, t_max, front, seed):
    wf = Workflow(make(), problem, Monitor(), t_max)
    state = wf.run(wf.init(seed))
    wf.close()
    if front is None:
        return float(state_extract(state, MONITOR)["best"])
    return igd(state_extract(state, ALGORITHM)["fit"], front)


def main() -> int:
    out = {}
    for name, (make, problem, t_max, front, threshold, margin, floor) in settings().items():
        values = [final_value(make, problem, t_max, front, s) for s in SEEDS]
        out[name] = {
            "iterations": t_max,
            "seeds": list(SEEDS),
            "median": float(np.median(values)),
            "max": float(np.max(values)),
            "threshold": threshold,
            "required_margin": margin,
            "floor": floor,
        }
        print(f"{name:6s} median={out[name]['median']:.3e} max={out[name]['max']:.3e} threshold={threshold:g}")
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
