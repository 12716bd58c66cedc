"""Experiment harness: seeded instance generation, the example x buffer x
algorithm x trial grid, aggregation into a ratio table, and report emission.

Every cell derives its RNG seed from the master seed by hashing the cell
coordinates, so results are independent of execution order and worker count,
and a partial run can resume from its JSON-lines results file.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .baselines import SaConfig, brute_force_optimal, johnson_sequence, simulated_annealing
from .gbml import GbmlConfig, evolve
from .model import Instance, ValidationError, make_instance, makespan, with_buffers

ALGORITHMS = ("gbml", "johnson", "sa", "brute")
RATIO_PAIRS = (("I_II", "gbml", "johnson"), ("I_III", "gbml", "sa"), ("II_III", "johnson", "sa"))


def cell_seed(master_seed: int, example: int, buffer_label: str, algorithm: str, trial: int) -> int:
    """Order-independent per-cell seed: a hash of the cell coordinates."""
    key = f"{master_seed}:{example}:{buffer_label}:{algorithm}:{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def buffer_label(buffer) -> str:
    return "inf" if buffer is None else str(buffer)


def generate_instance(
    n: int,
    m: int,
    lo: int = 1,
    hi: int = 10,
    seed: int | None = None,
    buffers=None,
) -> Instance:
    """Instance with processing times drawn uniformly from {lo..hi}."""
    if lo < 1 or hi < lo:
        raise ValidationError(f"invalid processing-time range [{lo}, {hi}]")
    rng = random.Random(seed)
    p = [[rng.randint(lo, hi) for _ in range(m)] for _ in range(n)]
    return make_instance(p, buffers=buffers, seed=seed)


@dataclass(frozen=True)
class ExperimentPlan:
    n_examples: int = 10
    n: int = 50
    m: int = 2
    time_lo: int = 1
    time_hi: int = 10
    buffers: tuple = (1, 3, 5, None)
    trials: int = 10
    algorithms: tuple[str, ...] = ("gbml", "johnson", "sa")
    master_seed: int = 0
    sa_at_unbounded: bool = False  # reference tables leave SA blank at unbounded capacity
    gbml: GbmlConfig = field(default_factory=GbmlConfig)
    sa: SaConfig = field(default_factory=SaConfig)

    def __post_init__(self):
        if self.n_examples < 1:
            raise ValidationError("n_examples must be at least 1")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.time_lo < 1 or self.time_hi < self.time_lo:
            raise ValidationError(
                f"invalid processing-time range [{self.time_lo}, {self.time_hi}]"
            )
        if not self.algorithms:
            raise ValidationError("algorithm list is empty")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValidationError(f"unknown algorithm '{a}'")
        for b in self.buffers:
            if b is not None and (not isinstance(b, int) or b < 0):
                raise ValidationError(f"invalid buffer capacity {b!r}")

    def to_document(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "n": self.n,
            "m": self.m,
            "time_lo": self.time_lo,
            "time_hi": self.time_hi,
            "buffers": list(self.buffers),
            "trials": self.trials,
            "algorithms": list(self.algorithms),
            "master_seed": self.master_seed,
            "sa_at_unbounded": self.sa_at_unbounded,
            "gbml": self.gbml.to_document(),
            "sa": self.sa.to_document(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "ExperimentPlan":
        if not isinstance(doc, dict):
            raise ValidationError("plan document must be a JSON object")
        kwargs = {}
        simple = (
            "n_examples", "n", "m", "time_lo", "time_hi", "trials", "master_seed",
            "sa_at_unbounded",
        )
        for k in simple:
            if k in doc:
                kwargs[k] = doc[k]
        if "buffers" in doc:
            kwargs["buffers"] = tuple(doc["buffers"])
        if "algorithms" in doc:
            kwargs["algorithms"] = tuple(doc["algorithms"])
        if "gbml" in doc:
            kwargs["gbml"] = GbmlConfig.from_document(doc["gbml"])
        if "sa" in doc:
            kwargs["sa"] = SaConfig.from_document(doc["sa"])
        return cls(**kwargs)

    def example_instance(self, example: int) -> Instance:
        """The base (unbounded-buffer) instance for one example slot."""
        seed = cell_seed(self.master_seed, example, "gen", "instance", 0)
        return generate_instance(self.n, self.m, self.time_lo, self.time_hi, seed=seed)


# ---------------------------------------------------------------------------
# Cell execution


def _run_cell(plan_doc: dict, example: int, buffer, algorithm: str, trial: int) -> dict:
    plan = ExperimentPlan.from_document(plan_doc)
    label = buffer_label(buffer)
    base = plan.example_instance(example)
    inst = base if buffer is None else with_buffers(base, [buffer] * (plan.m - 1))
    seed = cell_seed(plan.master_seed, example, label, algorithm, trial)
    row = {"example": example, "buffer": label, "algorithm": algorithm, "trial": trial}
    try:
        if algorithm == "johnson":
            row["makespan"] = makespan(inst, johnson_sequence(inst))
        elif algorithm == "sa":
            row["makespan"] = simulated_annealing(inst, plan.sa, seed=seed).objective
        elif algorithm == "gbml":
            row["makespan"] = evolve([inst], plan.gbml, seed=seed).objective
        elif algorithm == "brute":
            row["makespan"] = brute_force_optimal(inst)[1]
        else:
            raise ValidationError(f"unknown algorithm '{algorithm}'")
    except Exception as exc:  # per-cell failures are recorded, the run continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _cell_key(row: dict) -> tuple:
    return (row["example"], row["buffer"], row["algorithm"], row["trial"])


def plan_cells(plan: ExperimentPlan) -> list[tuple]:
    cells = []
    for example in range(plan.n_examples):
        for buffer in plan.buffers:
            for algorithm in plan.algorithms:
                if algorithm == "sa" and buffer is None and not plan.sa_at_unbounded:
                    continue
                for trial in range(plan.trials):
                    cells.append((example, buffer, algorithm, trial))
    return cells


def run_experiment(
    plan: ExperimentPlan,
    results_path: str | Path | None = None,
    workers: int = 1,
    progress=None,
) -> "ResultTable":
    """Execute every cell of the plan and aggregate the ratio table.

    ``results_path`` enables resume: completed cells are loaded from the
    JSON-lines file and skipped; fresh cells are appended as they finish.
    """
    done: dict[tuple, dict] = {}
    sink = None
    if results_path is not None:
        path = Path(results_path)
        if path.exists():
            with path.open() as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        row = json.loads(line)
                        done[_cell_key(row)] = row
        sink = path.open("a")

    plan_doc = plan.to_document()
    pending = [
        (example, buffer, algorithm, trial)
        for (example, buffer, algorithm, trial) in plan_cells(plan)
        if (example, buffer_label(buffer), algorithm, trial) not in done
    ]
    try:
        if workers > 1 and pending:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_cell, plan_doc, *cell) for cell in pending]
                for fut in futures:
                    row = fut.result()
                    done[_cell_key(row)] = row
                    if sink:
                        sink.write(json.dumps(row) + "\n")
                        sink.flush()
                    if progress:
                        progress(row)
        else:
            for cell in pending:
                row = _run_cell(plan_doc, *cell)
                done[_cell_key(row)] = row
                if sink:
                    sink.write(json.dumps(row) + "\n")
                    sink.flush()
                if progress:
                    progress(row)
    finally:
        if sink:
            sink.close()
    return aggregate(plan, done.values())


# ---------------------------------------------------------------------------
# Aggregation and reports


@dataclass(frozen=True)
class ResultRow:
    example: int
    buffer: object  # int capacity or None
    means: dict
    ratios: dict
    spreads: dict  # (min, max) makespan per algorithm over trials
    errors: tuple[str, ...] = ()


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[ResultRow, ...]
    trials: int

    def row(self, example: int, buffer) -> ResultRow:
        for r in self.rows:
            if r.example == example and r.buffer == buffer:
                return r
        raise KeyError((example, buffer))

    def to_document(self) -> dict:
        return {
            "trials": self.trials,
            "rows": [
                {
                    "example": r.example,
                    "buffer": buffer_label(r.buffer),
                    "means": r.means,
                    "ratios": r.ratios,
                    "spreads": {k: list(v) for k, v in r.spreads.items()},
                    "errors": list(r.errors),
                }
                for r in self.rows
            ],
        }


def aggregate(plan: ExperimentPlan, rows: Iterable[dict]) -> ResultTable:
    by_cell: dict[tuple, list[dict]] = {}
    for row in rows:
        by_cell.setdefault((row["example"], row["buffer"], row["algorithm"]), []).append(row)

    out = []
    for example in range(plan.n_examples):
        for buffer in plan.buffers:
            label = buffer_label(buffer)
            means: dict = {}
            spreads: dict = {}
            errors: list[str] = []
            for algorithm in plan.algorithms:
                cells = by_cell.get((example, label, algorithm), [])
                values = [c["makespan"] for c in cells if "makespan" in c]
                errors.extend(c["error"] for c in cells if "error" in c)
                if len(values) == plan.trials:
                    means[algorithm] = sum(values) / len(values)
                    spreads[algorithm] = (min(values), max(values))
                else:
                    means[algorithm] = None
            ratios: dict = {}
            for name, num, den in RATIO_PAIRS:
                a, b = means.get(num), means.get(den)
                ratios[name] = (a / b) if a is not None and b not in (None, 0) else None
            out.append(ResultRow(
                example=example, buffer=buffer, means=means, ratios=ratios,
                spreads=spreads, errors=tuple(errors),
            ))
    return ResultTable(rows=tuple(out), trials=plan.trials)


def _fmt_mean(x) -> str:
    if x is None:
        return ""
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _fmt_ratio(x) -> str:
    return "" if x is None else f"{x:.3f}"


CSV_HEADER = "example,buffer,mean_gbml,mean_johnson,mean_sa,ratio_I_II,ratio_I_III,ratio_II_III"


def emit_report(table: ResultTable, format: str = "csv") -> str:
    if format == "csv":
        lines = [CSV_HEADER]
        for r in table.rows:
            lines.append(",".join([
                str(r.example),
                buffer_label(r.buffer),
                _fmt_mean(r.means.get("gbml")),
                _fmt_mean(r.means.get("johnson")),
                _fmt_mean(r.means.get("sa")),
                _fmt_ratio(r.ratios.get("I_II")),
                _fmt_ratio(r.ratios.get("I_III")),
                _fmt_ratio(r.ratios.get("II_III")),
            ]))
        return "\n".join(lines) + "\n"
    if format == "json":
        return json.dumps(table.to_document(), indent=2, sort_keys=False) + "\n"
    if format == "markdown":
        header = CSV_HEADER.split(",")
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join(["---"] * len(header)) + "|"]
        for r in table.rows:
            lines.append("| " + " | ".join([
                str(r.example),
                buffer_label(r.buffer),
                _fmt_mean(r.means.get("gbml")),
                _fmt_mean(r.means.get("johnson")),
                _fmt_mean(r.means.get("sa")),
                _fmt_ratio(r.ratios.get("I_II")),
                _fmt_ratio(r.ratios.get("I_III")),
                _fmt_ratio(r.ratios.get("II_III")),
            ]) + " |")
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown report format '{format}'")
