"""Single- and multi-objective algorithms implementing ``setup``/``ask``/``tell``."""

from evoflow.algorithms.base import Algorithm
from evoflow.algorithms.cmaes import CMAES
from evoflow.algorithms.de import DE
from evoflow.algorithms.ibea import IBEA
from evoflow.algorithms.moead import MOEAD
from evoflow.algorithms.nsga2 import NSGA2
from evoflow.algorithms.pso import PSO
from evoflow.algorithms.rvea import RVEA

__all__ = ["Algorithm", "CMAES", "DE", "IBEA", "MOEAD", "NSGA2", "PSO", "RVEA"]
