"""Asynchronous run execution.

One FIFO thread pool (at most one run per core by default) owns every run.
The manager's lock guards the record map; readers always get snapshots, so a
poll during a run sees a consistent record with a non-decreasing progress
counter. Cancellation is cooperative: a flag the engines poll between
generations / iteration blocks — nothing is killed mid-evaluation.
"""

from __future__ import annotations

import os
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..baselines import SaConfig, simulated_annealing
from ..gbml import GbmlConfig, evolve
from ..model import Instance, ValidationError
from ..results import gbml_result_document, johnson_result_document, sa_result_document
from .store import DocumentStore

ALGORITHMS = ("gbml", "sa", "johnson")
_TERMINAL = ("done", "cancelled", "failed")


@dataclass
class RunRecord:
    id: str
    instance_id: str
    algorithm: str
    config: dict
    seed: int | None = None
    buffers: list | None = None
    status: str = "queued"
    progress: dict = field(default_factory=lambda: {"counter": 0, "best": None})
    result: dict | None = None
    error: str | None = None
    created_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "instance_id": self.instance_id,
            "algorithm": self.algorithm,
            "config": self.config,
            "seed": self.seed,
            "buffers": self.buffers,
            "status": self.status,
            "progress": dict(self.progress),
            "result": self.result,
            "error": self.error,
            "created_at": self.created_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "RunRecord":
        return cls(**{k: doc.get(k) for k in (
            "id", "instance_id", "algorithm", "config", "seed", "buffers",
            "status", "progress", "result", "error",
            "created_at", "started_at", "finished_at",
        )})


def make_run_config(algorithm: str, config_doc: dict | None):
    """Validate and snapshot the algorithm config (defaults filled in)."""
    doc = dict(config_doc or {})
    doc.pop("rng_seed", None)  # seed travels as a run parameter, not config
    if algorithm == "gbml":
        return GbmlConfig.from_document(doc)
    if algorithm == "sa":
        return SaConfig.from_document(doc)
    if algorithm == "johnson":
        if doc:
            raise ValidationError("the two-machine rule takes no config")
        return None
    raise ValidationError(f"unknown algorithm '{algorithm}' (expected one of {ALGORITHMS})")


class RunManager:
    def __init__(self, store: DocumentStore, workers: int | None = None):
        self.store = store
        self.workers = workers or os.cpu_count() or 1
        self._pool = ThreadPoolExecutor(max_workers=self.workers)
        self._lock = threading.Lock()
        self._records: dict[str, RunRecord] = {}
        self._cancel_flags: dict[str, threading.Event] = {}
        self._recover()

    def _recover(self) -> None:
        """Runs that were queued or running when the process died restart as failed."""
        for run_id in self.store.ids("runs"):
            doc = self.store.load("runs", run_id)
            record = RunRecord.from_document(doc)
            if record.status not in _TERMINAL:
                record.status = "failed"
                record.error = "interrupted by service restart"
                record.finished_at = time.time()
                self.store.save("runs", run_id, record.to_document())
            self._records[run_id] = record

    def _persist(self, record: RunRecord) -> None:
        self.store.save("runs", record.id, record.to_document())

    def submit(self, instance: Instance, algorithm: str, config_doc: dict | None,
               seed: int | None) -> dict:
        config = make_run_config(algorithm, config_doc)
        record = RunRecord(
            id=secrets.token_hex(8),
            instance_id=instance.id,
            algorithm=algorithm,
            config=config.to_document() if config is not None else {},
            seed=seed,
            buffers=list(instance.buffers),
            created_at=time.time(),
        )
        with self._lock:
            self._records[record.id] = record
            self._cancel_flags[record.id] = threading.Event()
            self._persist(record)
        self._pool.submit(self._execute, record.id, instance)
        return record.to_document()

    def get(self, run_id: str) -> dict | None:
        with self._lock:
            record = self._records.get(run_id)
            return record.to_document() if record else None

    def list(self) -> list[dict]:
        with self._lock:
            records = sorted(self._records.values(), key=lambda r: (r.created_at, r.id))
            return [r.to_document() for r in records]

    def cancel(self, run_id: str) -> dict | None:
        with self._lock:
            record = self._records.get(run_id)
            if record is None:
                return None
            flag = self._cancel_flags.get(run_id)
            if flag is not None and record.status not in _TERMINAL:
                flag.set()
            return record.to_document()

    def shutdown(self) -> None:
        with self._lock:
            for flag in self._cancel_flags.values():
                flag.set()
        self._pool.shutdown(wait=True, cancel_futures=True)

    # -- worker side ---------------------------------------------------------

    def _set_progress(self, run_id: str, counter: int, best) -> None:
        with self._lock:
            record = self._records[run_id]
            record.progress = {"counter": counter, "best": best}

    def _execute(self, run_id: str, instance: Instance) -> None:
        flag = self._cancel_flags[run_id]
        with self._lock:
            record = self._records[run_id]
            record.status = "running"
            record.started_at = time.time()
            algorithm, config_doc, seed = record.algorithm, record.config, record.seed
            self._persist(record)

        result_doc = None
        error = None
        cancelled = flag.is_set()
        try:
            if not cancelled:
                if algorithm == "johnson":
                    result_doc = johnson_result_document(instance)
                    self._set_progress(run_id, 1, result_doc["objective"])
                elif algorithm == "sa":
                    outcome = simulated_annealing(
                        instance, SaConfig.from_document(config_doc), seed=seed,
                        progress=lambda i, best: self._set_progress(run_id, i, best),
                        cancel=flag.is_set,
                    )
                    cancelled = outcome.cancelled
                    if not cancelled:
                        result_doc = sa_result_document(instance, outcome, seed)
                else:
                    outcome = evolve(
                        [instance], GbmlConfig.from_document(config_doc), seed=seed,
                        progress=lambda g, best: self._set_progress(run_id, g, best),
                        cancel=flag.is_set,
                    )
                    cancelled = outcome.cancelled
                    if not cancelled:
                        result_doc = gbml_result_document([instance], outcome, seed)
        except Exception as exc:  # failed runs carry the reason, service stays up
            error = f"{type(exc).__name__}: {exc}"

        with self._lock:
            record = self._records[run_id]
            if error is not None:
                record.status = "failed"
                record.error = error
            elif cancelled:
                record.status = "cancelled"
            else:
                record.status = "done"
                record.result = result_doc
            record.finished_at = time.time()
            self._persist(record)
