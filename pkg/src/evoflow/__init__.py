"""evoflow: functional evolutionary computation with reproducible parallel execution."""

from evoflow.rng import Key, key_new, key_split
from evoflow.state import ModuleNode, State, state_extract, state_init, state_merge

__version__ = "0.1.0"

__all__ = ["Key", "ModuleNode", "State", "key_new", "key_split", "state_extract", "state_init", "state_merge"]
