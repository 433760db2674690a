"""Monitors: record population and fitness snapshots off the main loop.

Every monitor keeps a tiny pure state (best-so-far and the latest fitness);
:class:`AsyncMonitor` additionally pushes :class:`MonitorRecord` objects onto
a bounded queue drained by a background thread. A full queue blocks the
producer, so no record is ever dropped.
"""

from __future__ import annotations

import csv
import os
import queue
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from evoflow.errors import ContractViolation
from evoflow.metrics import hypervolume_2d, igd
from evoflow.state import State

POPULATION = "population"
FITNESS = "fitness"
_KIND_ORDER = {POPULATION: 0, FITNESS: 1}


@dataclass(frozen=True)
class MonitorRecord:
    kind: str
    iteration: int
    payload: np.ndarray
    timestamp: float


class Monitor:
    """Synchronous no-op monitor; base for the others."""

    def setup(self, key):
        return {"best": np.inf, "last_fit": None}

    def record_pop(self, state: State, pop: np.ndarray, iteration: int) -> State:
        self.dispatch(MonitorRecord(POPULATION, iteration, pop, time.time()))
        return state

    def record_fit(self, state: State, fit: np.ndarray, iteration: int) -> State:
        self.dispatch(MonitorRecord(FITNESS, iteration, fit, time.time()))
        best = state["best"]
        if fit.shape[1] == 1 and fit.shape[0]:
            best = min(best, float(fit[:, 0].min()))
        return state.update(best=best, last_fit=fit)

    def dispatch(self, record: MonitorRecord) -> None:
        pass

    def close(self) -> None:
        pass


class AsyncMonitor(Monitor):
    """Hands records to ``sink`` on a consumer thread.

    ``sink`` is any callable taking a record; if it has a ``close`` method
    that is called once the queue is drained. Errors raised by the sink are
    re-raised from :meth:`close`.
    """

    def __init__(self, sink: Callable[[MonitorRecord], None], capacity: int = 64):
        self.sink = sink
        self._queue: queue.Queue = queue.Queue(maxsize=capacity)
        self._last: dict[str, int] = {}
        self._error: BaseException | None = None
        self._closed = False
        self._thread = threading.Thread(target=self._consume, name="evoflow-monitor", daemon=True)
        self._thread.start()

    def dispatch(self, record: MonitorRecord) -> None:
        if self._closed:
            raise ContractViolation("monitor is closed", "monitor")
        last = self._last.get(record.kind)
        if last is not None and record.iteration <= last:
            raise ContractViolation(
                f"{record.kind} record for iteration {record.iteration} after iteration {last}", "monitor"
            )
        self._last[record.kind] = record.iteration
        self._queue.put(record)

    def _consume(self) -> None:
        while True:
            record = self._queue.get()
            if record is None:
                return
            if self._error is None:
                try:
                    self.sink(record)
                except BaseException as exc:
                    self._error = exc

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._queue.put(None)
        self._thread.join()
        closer = getattr(self.sink, "close", None)
        if closer is not None and self._error is None:
            try:
                closer()
            except BaseException as exc:
                self._error = exc
        if self._error is not None:
            raise self._error


class RecordingSink:
    """Keeps every record in memory; for tests and notebooks."""

    def __init__(self, delay: float = 0.0):
        self.records: list[MonitorRecord] = []
        self.delay = delay

    def __call__(self, record: MonitorRecord) -> None:
        if self.delay:
            time.sleep(self.delay)
        self.records.append(record)


class CsvSink:
    """Writes ``metrics.csv`` (one row per fitness record) and, optionally, ``population.csv``.

    Metric columns depend on the problem: ``best`` (best-so-far) for one objective,
    ``igd`` when a reference front is given, ``hv`` for two objectives with a
    reference point. With ``wall_clock=False`` the ``elapsed_ms`` column is
    left empty so that repeated runs produce identical files.
    """

    def __init__(
        self,
        out_dir: str,
        n_objectives: int,
        reference_front: np.ndarray | None = None,
        hv_ref_point: np.ndarray | None = None,
        snapshot: bool = False,
        wall_clock: bool = True,
    ):
        os.makedirs(out_dir, exist_ok=True)
        self.n_objectives = n_objectives
        self.reference_front = reference_front
        self.hv_ref_point = hv_ref_point
        self.wall_clock = wall_clock
        self.start = time.time()
        self.best = np.inf
        self.columns = ["iteration", "elapsed_ms"]
        if n_objectives == 1:
            self.columns.append("best")
        if reference_front is not None:
            self.columns.append("igd")
        if n_objectives == 2 and hv_ref_point is not None:
            self.columns.append("hv")
        self.metrics_path = os.path.join(out_dir, "metrics.csv")
        self._metrics_file = open(self.metrics_path, "w", newline="")
        self._metrics = csv.writer(self._metrics_file, lineterminator="\n")
        self._metrics.writerow(self.columns)
        self.population_path = os.path.join(out_dir, "population.csv") if snapshot else None
        self._pop_file = None
        if snapshot:
            self._pop_file = open(self.population_path, "w", newline="")
            self._pop = csv.writer(self._pop_file, lineterminator="\n")
            self._pop.writerow(["iteration", "row", "col", "value"])

    def __call__(self, record: MonitorRecord) -> None:
        if record.kind == POPULATION:
            if self._pop_file is not None:
                for (r, c), v in np.ndenumerate(record.payload):
                    self._pop.writerow([record.iteration, r, c, repr(float(v))])
            return
        fit = record.payload
        row = [record.iteration, f"{(record.timestamp - self.start) * 1000.0:.3f}" if self.wall_clock else ""]
        if "best" in self.columns:
            if fit.shape[0]:
                self.best = min(self.best, float(fit[:, 0].min()))
            row.append(repr(self.best))
        if "igd" in self.columns:
            row.append(repr(igd(fit, self.reference_front)))
        if "hv" in self.columns:
            inside = fit[np.all(fit < self.hv_ref_point, axis=1)]
            row.append(repr(hypervolume_2d(inside, self.hv_ref_point) if inside.size else 0.0))
        self._metrics.writerow(row)

    def close(self) -> None:
        self._metrics_file.close()
        if self._pop_file is not None:
            self._pop_file.close()
