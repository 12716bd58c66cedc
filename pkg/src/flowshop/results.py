"""Canonical result documents shared by the CLI and the HTTP service.

Both front ends must emit byte-identical payloads for the same inputs, so
every algorithm result is serialized through these builders and rendered
with ``canonical_json``.
"""

from __future__ import annotations

from .baselines import SaResult, johnson_sequence
from .gbml import GbmlResult
from .model import Instance, evaluate_timeline


def _buffers_field(instance: Instance) -> list:
    return list(instance.buffers)


def johnson_result_document(instance: Instance) -> dict:
    """Run the two-machine rule and package sequence plus makespan."""
    seq = johnson_sequence(instance)
    tl = evaluate_timeline(instance, seq)
    return {
        "algorithm": "johnson",
        "instance_id": instance.id,
        "buffers": _buffers_field(instance),
        "seed": None,
        "objective": tl.makespan,
        "sequence": list(seq),
    }


def sa_result_document(instance: Instance, result: SaResult, seed: int | None) -> dict:
    doc = result.to_document()
    return {
        "algorithm": "sa",
        "instance_id": instance.id,
        "buffers": _buffers_field(instance),
        "seed": seed,
        "objective": doc["objective"],
        "sequence": doc["sequence"],
        "initial_objective": doc["initial_objective"],
        "initial_temperature": doc["initial_temperature"],
        "iterations_run": doc["iterations_run"],
        "cancelled": doc["cancelled"],
        "trace": doc["trace"],
    }


def gbml_result_document(instances: list[Instance], result: GbmlResult, seed: int | None) -> dict:
    doc = result.to_document()
    return {
        "algorithm": "gbml",
        "instance_ids": [inst.id for inst in instances],
        "buffers": [_buffers_field(inst) for inst in instances],
        "seed": seed,
        "objective": doc["objective"],
        "per_problem": doc["per_problem"],
        "sequences": [list(s) for s in result.sequences],
        "ruleset": doc["ruleset"],
        "generations_run": doc["generations_run"],
        "evaluations": doc["evaluations"],
        "fallback_generations": doc["fallback_generations"],
        "cancelled": doc["cancelled"],
        "history": doc["history"],
    }
