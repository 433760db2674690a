"""Workflow analysis: how tensors are placed across workers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from evoflow.errors import InvalidArgument

# population tensors narrower than this many columns per worker stay replicated
DIM_SHARD_MIN_COLS = 64


class Placement(str, Enum):
    REPLICATED = "replicated"
    SHARD_BY_DIMENSION = "shard_by_dimension"
    SHARD_BY_INDIVIDUAL = "shard_by_individual"


def split_sizes(n: int, parts: int) -> list[int]:
    """Contiguous partition sizes; the first ``n % parts`` parts get one extra element."""
    if parts < 1:
        raise InvalidArgument("need at least one part")
    base, extra = divmod(n, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def slices_from_sizes(sizes: list[int]) -> list[tuple[int, int]]:
    bounds = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes))]


@dataclass(frozen=True)
class ShardingPlan:
    workers: int
    placements: dict[str, Placement]
    row_slices: list[tuple[int, int]]
    col_slices: list[tuple[int, int]]

    @property
    def row_sizes(self) -> list[int]:
        return [b - a for a, b in self.row_slices]

    @property
    def col_sizes(self) -> list[int]:
        return [b - a for a, b in self.col_slices]

    def shard_rows(self, a: np.ndarray) -> list[np.ndarray]:
        return [a[lo:hi] for lo, hi in self.row_slices]

    def shard_columns(self, a: np.ndarray) -> list[np.ndarray]:
        if self.placements["population"] is Placement.REPLICATED:
            return [a for _ in range(self.workers)]
        return [a[:, lo:hi] for lo, hi in self.col_slices]

    def gather_columns(self, shards: list[np.ndarray]) -> np.ndarray:
        if self.placements["population"] is Placement.REPLICATED:
            return shards[0]
        return np.hstack(shards)


def analyze(workflow, workers: int, dim: int | None = None, pop_size: int | None = None) -> ShardingPlan:
    """Plan evaluation sharded by individual and population sharded by dimension when wide enough.

    ``dim`` and ``pop_size`` default to the workflow's algorithm.
    """
    if workers < 1:
        raise InvalidArgument(f"worker count must be >= 1, got {workers}")
    if dim is None:
        dim = workflow.algorithm.dim
    if pop_size is None:
        pop_size = workflow.algorithm.pop_size
    wide = dim >= DIM_SHARD_MIN_COLS * workers
    pop_placement = Placement.SHARD_BY_DIMENSION if wide else Placement.REPLICATED
    return ShardingPlan(
        workers=workers,
        placements={
            "population": pop_placement,
            "fitness": Placement.SHARD_BY_INDIVIDUAL,
            "static": Placement.REPLICATED,
        },
        row_slices=slices_from_sizes(split_sizes(pop_size, workers)),
        col_slices=slices_from_sizes(split_sizes(dim, workers)),
    )
