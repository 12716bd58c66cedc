"""HTTP service: instance store, asynchronous run execution, what-if evaluation."""

from .app import create_app
from .runner import RunManager, RunRecord, make_run_config
from .store import DocumentStore

__all__ = ["create_app", "DocumentStore", "RunManager", "RunRecord", "make_run_config"]
