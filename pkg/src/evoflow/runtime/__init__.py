"""Workflow engine, local and SPMD executors, and monitors."""

from evoflow.runtime.executor import LocalExecutor, parallel_evaluate
from evoflow.runtime.monitor import AsyncMonitor, CsvSink, Monitor, MonitorRecord, RecordingSink
from evoflow.runtime.sharding import Placement, ShardingPlan, analyze
from evoflow.runtime.spmd import ClusterConfig, SpmdComm, SpmdEvaluator, all_gather
from evoflow.runtime.workflow import Workflow

__all__ = [
    "AsyncMonitor",
    "ClusterConfig",
    "CsvSink",
    "LocalExecutor",
    "Monitor",
    "MonitorRecord",
    "Placement",
    "RecordingSink",
    "ShardingPlan",
    "SpmdComm",
    "SpmdEvaluator",
    "Workflow",
    "all_gather",
    "analyze",
    "parallel_evaluate",
]
