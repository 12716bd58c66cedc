"""Reference sequencing methods the evolved rule-sets are measured against:
the two-machine optimal ordering rule, simulated annealing over permutations,
and exhaustive search for small instances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import permutations
from typing import Callable

import numpy as np

from .model import Instance, ValidationError, makespan


def johnson_sequence(instance: Instance) -> tuple[int, ...]:
    """Optimal two-machine sequence for unbounded buffers.

    Jobs faster on the first machine go first, in ascending first-machine
    time; the rest follow in descending second-machine time. All ties keep
    the lowest job index, and jobs equal on both machines join the first
    group.
    """
    if instance.m != 2:
        raise ValidationError(f"two-machine rule needs m=2, instance has m={instance.m}")
    first = [j for j in range(instance.n) if instance.p[j][0] <= instance.p[j][1]]
    rest = [j for j in range(instance.n) if instance.p[j][0] > instance.p[j][1]]
    first.sort(key=lambda j: instance.p[j][0])
    rest.sort(key=lambda j: -instance.p[j][1])
    return tuple(first + rest)


# ---------------------------------------------------------------------------
# Simulated annealing


@dataclass(frozen=True)
class SaConfig:
    iterations: int = 5000
    initial_temperature: float | None = None  # None: probe-move estimate
    cooling_rate: float = 0.95
    moves_per_temperature: int | None = None  # None: one sweep of n moves
    neighborhood: str = "swap"
    probe_moves: int = 100

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be at least 1")
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValidationError("initial_temperature must be positive")
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValidationError("cooling_rate must be in (0, 1)")
        if self.moves_per_temperature is not None and self.moves_per_temperature < 1:
            raise ValidationError("moves_per_temperature must be at least 1")
        if self.neighborhood not in ("swap", "insert"):
            raise ValidationError(f"unknown neighborhood '{self.neighborhood}'")

    def to_document(self) -> dict:
        return {
            "iterations": self.iterations,
            "initial_temperature": self.initial_temperature,
            "cooling_rate": self.cooling_rate,
            "moves_per_temperature": self.moves_per_temperature,
            "neighborhood": self.neighborhood,
            "probe_moves": self.probe_moves,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SaConfig":
        kwargs = {k: doc[k] for k in (
            "iterations", "initial_temperature", "cooling_rate",
            "moves_per_temperature", "neighborhood", "probe_moves",
        ) if k in doc}
        return cls(**kwargs)


@dataclass(frozen=True)
class SaResult:
    sequence: tuple[int, ...]
    objective: int
    initial_objective: int
    initial_temperature: float
    trace: tuple[tuple[int, int], ...]
    iterations_run: int
    cancelled: bool

    def to_document(self) -> dict:
        return {
            "algorithm": "sa",
            "objective": self.objective,
            "sequence": list(self.sequence),
            "initial_objective": self.initial_objective,
            "initial_temperature": self.initial_temperature,
            "iterations_run": self.iterations_run,
            "cancelled": self.cancelled,
            "trace": [[i, v] for i, v in self.trace],
        }


def _random_move(rng: random.Random, seq: list[int], neighborhood: str) -> list[int]:
    n = len(seq)
    out = list(seq)
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    if neighborhood == "swap":
        out[i], out[j] = out[j], out[i]
    else:
        job = out.pop(i)
        out.insert(j, job)
    return out


def _probe_temperature(rng: random.Random, instance: Instance, seq: list[int],
                       value: int, probes: int, neighborhood: str) -> float:
    worsenings = []
    for _ in range(probes):
        delta = makespan(instance, _random_move(rng, seq, neighborhood)) - value
        if delta > 0:
            worsenings.append(delta)
    if not worsenings:
        return 1.0
    return sum(worsenings) / len(worsenings)


def simulated_annealing(
    instance: Instance,
    config: SaConfig | None = None,
    seed: int | None = None,
    progress: Callable[[int, int], None] | None = None,
    cancel: Callable[[], bool] | None = None,
) -> SaResult:
    """Anneal the job permutation under the configured move kind.

    Starts from the two-machine ordering rule when m=2 (identity otherwise),
    so the best sequence found is never worse than that start. Temperature
    drops by the cooling rate after every block of moves; worsening moves of
    gap d are accepted with probability exp(-d / T).
    """
    cfg = config or SaConfig()
    rng = random.Random(seed)
    if instance.m == 2:
        current = list(johnson_sequence(instance))
    else:
        current = list(range(instance.n))
    current_value = makespan(instance, current)
    best = list(current)
    best_value = current_value
    trace: list[tuple[int, int]] = [(0, best_value)]

    if instance.n < 2:
        return SaResult(
            sequence=tuple(best), objective=best_value, initial_objective=best_value,
            initial_temperature=cfg.initial_temperature or 1.0,
            trace=tuple(trace), iterations_run=0, cancelled=False,
        )

    if cfg.initial_temperature is not None:
        temperature = cfg.initial_temperature
    else:
        temperature = _probe_temperature(
            rng, instance, current, current_value, cfg.probe_moves, cfg.neighborhood
        )
    initial_temperature = temperature
    block = cfg.moves_per_temperature or instance.n

    initial_value = best_value
    iterations_run = 0
    cancelled = False
    for it in range(1, cfg.iterations + 1):
        candidate = _random_move(rng, current, cfg.neighborhood)
        value = makespan(instance, candidate)
        delta = value - current_value
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            current, current_value = candidate, value
            if current_value < best_value:
                best, best_value = list(current), current_value
                trace.append((it, best_value))
        if it % block == 0:
            temperature *= cfg.cooling_rate
            if progress is not None:
                progress(it, best_value)
            if cancel is not None and cancel():
                iterations_run = it
                cancelled = True
                break
        iterations_run = it

    if progress is not None and not cancelled and iterations_run % block != 0:
        progress(iterations_run, best_value)

    return SaResult(
        sequence=tuple(best),
        objective=best_value,
        initial_objective=initial_value,
        initial_temperature=initial_temperature,
        trace=tuple(trace),
        iterations_run=iterations_run,
        cancelled=cancelled,
    )


# ---------------------------------------------------------------------------
# Exhaustive search

_PERMS_CACHE: dict[int, np.ndarray] = {}
_CHUNK = 50000


def _all_permutations(n: int) -> np.ndarray:
    cached = _PERMS_CACHE.get(n)
    if cached is None:
        cached = np.array(list(permutations(range(n))), dtype=np.int8)
        _PERMS_CACHE[n] = cached
    return cached


def _batch_makespans(instance: Instance, perms: np.ndarray) -> np.ndarray:
    """Makespan of every permutation row, via the timeline recurrence
    vectorized across permutations."""
    k_count = instance.m
    n = instance.n
    proc = np.asarray(instance.p, dtype=np.int64)[perms]  # (rows, n, m)
    rows = perms.shape[0]
    depart_last = np.zeros((k_count, rows), dtype=np.int64)
    need_starts = any(b is not None and b >= 1 for b in instance.buffers)
    start_hist: list[list[np.ndarray]] = [[] for _ in range(k_count)]
    for i in range(n):
        d_prev = np.zeros(rows, dtype=np.int64)
        for k in range(k_count):
            if i > 0:
                s = np.maximum(d_prev, depart_last[k])
            else:
                s = d_prev.copy()
            if need_starts:
                start_hist[k].append(s)
            f = s + proc[:, i, k]
            if k == k_count - 1:
                d = f
            else:
                b = instance.buffers[k]
                if b is None:
                    d = f
                elif b == 0:
                    d = np.maximum(f, depart_last[k + 1]) if i > 0 else f
                else:
                    d = np.maximum(f, start_hist[k + 1][i - b]) if i - b >= 0 else f
            depart_last[k] = d
            d_prev = d
    return depart_last[k_count - 1]


def brute_force_optimal(instance: Instance, limit: int = 9) -> tuple[tuple[int, ...], int]:
    """Best sequence over all n! permutations; ties take the
    lexicographically smallest sequence. Refuses n above ``limit``."""
    if instance.n > limit:
        raise ValidationError(
            f"exhaustive search limited to n <= {limit}, instance has n={instance.n}"
        )
    perms = _all_permutations(instance.n)
    best_value = None
    best_row = None
    for lo in range(0, perms.shape[0], _CHUNK):
        chunk = perms[lo:lo + _CHUNK]
        values = _batch_makespans(instance, chunk)
        idx = int(np.argmin(values))
        value = int(values[idx])
        if best_value is None or value < best_value:
            best_value = value
            best_row = chunk[idx].tolist()
    return tuple(int(j) for j in best_row), best_value
