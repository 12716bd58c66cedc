"""HTTP front end: instance management, asynchronous runs, what-if evaluation.

Every payload is serialized with the shared canonical JSON writer, so a result
fetched here is byte-identical to the CLI's output for the same inputs and
seed. Errors always carry {code, message, detail}.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..bench import generate_instance
from ..model import (
    Instance,
    ValidationError,
    canonical_json,
    evaluate_timeline,
    validate_instance,
    validate_sequence,
    with_buffers,
)
from .runner import RunManager
from .store import DocumentStore


class NotFoundError(Exception):
    def __init__(self, kind: str, doc_id: str):
        super().__init__(f"{kind} '{doc_id}' not found")
        self.detail = {"kind": kind, "id": doc_id}


class RunRequest(BaseModel):
    instance_id: str
    algorithm: str
    buffers: list[int | None] | None = None
    config: dict | None = None
    seed: int | None = None


class EvaluateRequest(BaseModel):
    instance_id: str
    sequence: list[int]
    buffers: list[int | None] | None = None


def _canonical(document) -> Response:
    return Response(content=canonical_json(document), media_type="application/json")


def create_app(data_dir: str | Path, workers: int | None = None) -> FastAPI:
    store = DocumentStore(data_dir)
    manager = RunManager(store, workers=workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        manager.shutdown()

    app = FastAPI(title="flowshop service", version="0.1.0", lifespan=lifespan)
    app.state.store = store
    app.state.manager = manager

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "validation_error", "message": str(exc), "detail": None},
        )

    @app.exception_handler(RequestValidationError)
    async def _request_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "validation_error", "message": "malformed request body",
                     "detail": exc.errors()},
        )

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(
            status_code=404,
            content={"code": "not_found", "message": str(exc), "detail": exc.detail},
        )

    def _load_instance(instance_id: str) -> Instance:
        doc = store.load("instances", instance_id)
        if doc is None:
            raise NotFoundError("instance", instance_id)
        return validate_instance(doc)

    def _effective_instance(instance_id: str, buffers) -> Instance:
        inst = _load_instance(instance_id)
        return inst if buffers is None else with_buffers(inst, buffers)

    @app.get("/health")
    def health():
        return {"status": "ok", "workers": manager.workers}

    # -- instances ------------------------------------------------------------

    @app.post("/instances", status_code=201)
    async def create_instance(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict):
            raise ValidationError("instance payload must be a JSON object")
        if "p" in payload:
            inst = validate_instance(payload)
            # content-addressed: a client-supplied id is ignored
            inst = validate_instance({
                "m": inst.m, "n": inst.n, "p": [list(r) for r in inst.p],
                "buffers": list(inst.buffers), "seed": inst.seed,
            })
        else:
            known = {"n", "m", "lo", "hi", "seed", "buffers"}
            unknown = set(payload) - known
            if unknown:
                raise ValidationError(
                    f"unknown generation fields {sorted(unknown)}; expected {sorted(known)}")
            if "n" not in payload:
                raise ValidationError("generation request needs at least 'n'")
            inst = generate_instance(
                n=payload["n"], m=payload.get("m", 2),
                lo=payload.get("lo", 1), hi=payload.get("hi", 10),
                seed=payload.get("seed"), buffers=payload.get("buffers"),
            )
        store.save("instances", inst.id, inst.to_document())
        return {"id": inst.id}

    @app.get("/instances")
    def list_instances():
        out = []
        for doc_id in store.ids("instances"):
            doc = store.load("instances", doc_id)
            out.append({"id": doc_id, "n": doc["n"], "m": doc["m"], "buffers": doc["buffers"]})
        return {"instances": out}

    @app.get("/instances/{instance_id}")
    def get_instance(instance_id: str):
        doc = store.load("instances", instance_id)
        if doc is None:
            raise NotFoundError("instance", instance_id)
        return _canonical(doc)

    # -- runs -----------------------------------------------------------------

    @app.post("/runs", status_code=201)
    def create_run(body: RunRequest):
        inst = _effective_instance(body.instance_id, body.buffers)
        record = manager.submit(inst, body.algorithm, body.config, body.seed)
        return {"run_id": record["id"]}

    @app.get("/runs")
    def list_runs():
        return _canonical({"runs": manager.list()})

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        record = manager.get(run_id)
        if record is None:
            raise NotFoundError("run", run_id)
        return _canonical(record)

    @app.delete("/runs/{run_id}")
    def cancel_run(run_id: str):
        record = manager.cancel(run_id)
        if record is None:
            raise NotFoundError("run", run_id)
        return _canonical(record)

    # -- what-if evaluation ---------------------------------------------------

    @app.post("/evaluate")
    def evaluate(body: EvaluateRequest):
        inst = _effective_instance(body.instance_id, body.buffers)
        validate_sequence(inst, body.sequence)
        timeline = evaluate_timeline(inst, body.sequence)
        return _canonical(timeline.to_document())

    return app
