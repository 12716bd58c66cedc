"""Problem instances and exact timeline evaluation for permutation flow shops.

All quantities are integers: processing times, start/finish/departure times
and makespans. A buffer capacity of ``None`` means unbounded storage between
the two adjacent machines; an integer capacity (possibly 0) bounds the number
of jobs that may sit between them, with a full buffer blocking the upstream
machine.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence as SeqT


class ValidationError(ValueError):
    """Raised when an instance, sequence or configuration is malformed."""


def canonical_json(obj) -> str:
    """Serialize with no whitespace, preserving key insertion order."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _check_capacity(value, stage: int):
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"buffers[{stage}] must be a non-negative integer or null")
    if value < 0:
        raise ValidationError(f"buffers[{stage}] is negative ({value})")
    return value


@dataclass(frozen=True)
class Instance:
    """A permutation flow-shop problem.

    Attributes:
        id: opaque identifier (content hash for generated instances).
        m: number of machines, >= 1.
        n: number of jobs, >= 1.
        p: n rows of m non-negative integer processing times.
        buffers: m-1 capacities between consecutive machines; None = unbounded.
        seed: generator seed when the instance was drawn randomly.
    """

    id: str
    m: int
    n: int
    p: tuple[tuple[int, ...], ...]
    buffers: tuple[int | None, ...]
    seed: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"machine count must be >= 1, got {self.m}")
        if self.n < 1:
            raise ValidationError(f"job count must be >= 1, got {self.n}")
        if len(self.p) != self.n:
            raise ValidationError(f"p has {len(self.p)} rows, expected n={self.n}")
        for j, row in enumerate(self.p):
            if len(row) != self.m:
                raise ValidationError(f"p row {j} has length {len(row)}, expected m={self.m}")
            for k, value in enumerate(row):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ValidationError(f"p[{j}][{k}] must be an integer")
                if value < 0:
                    raise ValidationError(f"p[{j}][{k}] is negative ({value})")
        if len(self.buffers) != self.m - 1:
            raise ValidationError(
                f"buffers has {len(self.buffers)} entries, expected m-1={self.m - 1}"
            )
        for k, cap in enumerate(self.buffers):
            _check_capacity(cap, k)

    def to_document(self) -> dict:
        """Canonical JSON document: {"id", "m", "n", "p", "buffers", "seed"}."""
        return {
            "id": self.id,
            "m": self.m,
            "n": self.n,
            "p": [list(row) for row in self.p],
            "buffers": list(self.buffers),
            "seed": self.seed,
        }


def content_id(m: int, n: int, p, buffers, seed=None) -> str:
    """Deterministic instance id: hash of the instance content."""
    payload = canonical_json(
        {"m": m, "n": n, "p": [list(r) for r in p], "buffers": list(buffers), "seed": seed}
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def make_instance(p, buffers=None, seed: int | None = None, instance_id: str | None = None) -> Instance:
    """Build a validated instance from a processing-time matrix.

    ``buffers`` defaults to all-unbounded.
    """
    rows = tuple(tuple(row) for row in p)
    n = len(rows)
    m = len(rows[0]) if rows else 0
    caps = tuple(buffers) if buffers is not None else (None,) * max(m - 1, 0)
    if instance_id is None:
        instance_id = content_id(m, n, rows, caps, seed)
    return Instance(id=instance_id, m=m, n=n, p=rows, buffers=caps, seed=seed)


def with_buffers(instance: Instance, buffers: SeqT[int | None]) -> Instance:
    """Same processing times under different buffer capacities (fresh id)."""
    caps = tuple(buffers)
    if len(caps) != instance.m - 1:
        raise ValidationError(
            f"buffers has {len(caps)} entries, expected m-1={instance.m - 1}"
        )
    for k, cap in enumerate(caps):
        _check_capacity(cap, k)
    new_id = content_id(instance.m, instance.n, instance.p, caps, instance.seed)
    return replace(instance, id=new_id, buffers=caps)


def validate_instance(raw) -> Instance:
    """Validate a candidate instance (mapping or Instance) and return it.

    Raises ValidationError naming the offending field or index.
    """
    if isinstance(raw, Instance):
        return raw
    if not isinstance(raw, Mapping):
        raise ValidationError("instance document must be a JSON object")
    for key in ("m", "n", "p", "buffers"):
        if key not in raw:
            raise ValidationError(f"instance document missing field '{key}'")
    m, n = raw["m"], raw["n"]
    if isinstance(m, bool) or not isinstance(m, int):
        raise ValidationError("field 'm' must be an integer")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError("field 'n' must be an integer")
    p = raw["p"]
    if not isinstance(p, (list, tuple)):
        raise ValidationError("field 'p' must be a list of rows")
    buffers = raw["buffers"]
    if not isinstance(buffers, (list, tuple)):
        raise ValidationError("field 'buffers' must be a list")
    seed = raw.get("seed")
    instance_id = raw.get("id") or content_id(m, n, p, buffers, seed)
    return Instance(
        id=instance_id,
        m=m,
        n=n,
        p=tuple(tuple(row) for row in p),
        buffers=tuple(buffers),
        seed=seed,
    )


def validate_sequence(instance: Instance, order: Iterable[int]) -> tuple[int, ...]:
    """Check that ``order`` is a permutation of the instance's job indices."""
    seq = tuple(order)
    if len(seq) != instance.n:
        raise ValidationError(f"sequence has {len(seq)} entries, expected n={instance.n}")
    seen = [False] * instance.n
    for pos, j in enumerate(seq):
        if isinstance(j, bool) or not isinstance(j, int):
            raise ValidationError(f"sequence[{pos}] must be an integer job index")
        if not 0 <= j < instance.n:
            raise ValidationError(f"sequence[{pos}]={j} out of range [0, {instance.n})")
        if seen[j]:
            raise ValidationError(f"sequence[{pos}]={j} is a duplicate job index")
        seen[j] = True
    return seq


class TimelineBuilder:
    """Incrementally extends a schedule one sequenced job at a time.

    Per-position recurrence, with S/F/D the start, finish and departure of
    the job at sequence position i on machine k (0-based):

        S[k][i] = max(D[k-1][i], D[k][i-1])
        F[k][i] = S[k][i] + p[job][k]
        D[k][i] = F[k][i]                         last machine or unbounded buffer
                = max(F[k][i], D[k+1][i-1])       capacity 0 (job passes straight through)
                = max(F[k][i], S[k+1][i-b])       capacity b >= 1

    A departure later than the finish is blocking time: the job holds its
    machine until a downstream slot frees.
    """

    def __init__(self, instance: Instance, buffers: SeqT[int | None] | None = None):
        self.instance = instance
        self.buffers = tuple(buffers) if buffers is not None else instance.buffers
        if len(self.buffers) != instance.m - 1:
            raise ValidationError(
                f"buffers has {len(self.buffers)} entries, expected m-1={instance.m - 1}"
            )
        m = instance.m
        self.sequence: list[int] = []
        self.start: list[list[int]] = [[] for _ in range(m)]
        self.finish: list[list[int]] = [[] for _ in range(m)]
        self.depart: list[list[int]] = [[] for _ in range(m)]

    def append(self, job: int) -> None:
        """Schedule ``job`` at the next sequence position."""
        inst = self.instance
        p_row = inst.p[job]
        m = inst.m
        i = len(self.sequence)
        start, finish, depart = self.start, self.finish, self.depart
        d_prev_machine = 0
        for k in range(m):
            s = d_prev_machine
            if i > 0:
                d_same = depart[k][i - 1]
                if d_same > s:
                    s = d_same
            f = s + p_row[k]
            if k == m - 1:
                d = f
            else:
                b = self.buffers[k]
                if b is None:
                    d = f
                elif b == 0:
                    d = max(f, depart[k + 1][i - 1]) if i > 0 else f
                else:
                    d = max(f, start[k + 1][i - b]) if i - b >= 0 else f
            start[k].append(s)
            finish[k].append(f)
            depart[k].append(d)
            d_prev_machine = d
        self.sequence.append(job)

    @property
    def makespan(self) -> int:
        if not self.sequence:
            return 0
        return self.finish[-1][-1]

    def last_departure(self, machine: int) -> int:
        return self.depart[machine][-1]

    def stage_occupancy_now(self, stage: int) -> int:
        """Jobs sitting in buffer ``stage`` when the newest job departs machine ``stage``.

        Counts sequenced jobs that have departed machine ``stage`` but not yet
        started machine ``stage + 1`` at that moment. Departures and next-stage
        starts are both non-decreasing along the sequence, so the buffered jobs
        form a suffix of the positions scheduled so far.
        """
        if not self.sequence:
            return 0
        t = self.depart[stage][-1]
        next_starts = self.start[stage + 1]
        count = 0
        for i in range(len(next_starts) - 1, -1, -1):
            if next_starts[i] > t:
                count += 1
            else:
                break
        return count

    def build(self) -> "ScheduleTimeline":
        """Freeze into a job-indexed timeline (requires a complete sequence)."""
        inst = self.instance
        if len(self.sequence) != inst.n:
            raise ValidationError(
                f"timeline covers {len(self.sequence)} of {inst.n} jobs"
            )
        n, m = inst.n, inst.m
        start = [[0] * m for _ in range(n)]
        finish = [[0] * m for _ in range(n)]
        depart = [[0] * m for _ in range(n)]
        for i, job in enumerate(self.sequence):
            for k in range(m):
                start[job][k] = self.start[k][i]
                finish[job][k] = self.finish[k][i]
                depart[job][k] = self.depart[k][i]
        return ScheduleTimeline(
            sequence=tuple(self.sequence),
            buffers=self.buffers,
            start=tuple(tuple(r) for r in start),
            finish=tuple(tuple(r) for r in finish),
            depart=tuple(tuple(r) for r in depart),
            makespan=self.makespan,
        )


@dataclass(frozen=True)
class ScheduleTimeline:
    """Job-indexed schedule times: start/finish/depart per job per machine."""

    sequence: tuple[int, ...]
    buffers: tuple[int | None, ...]
    start: tuple[tuple[int, ...], ...]
    finish: tuple[tuple[int, ...], ...]
    depart: tuple[tuple[int, ...], ...]
    makespan: int

    @property
    def n(self) -> int:
        return len(self.start)

    @property
    def m(self) -> int:
        return len(self.start[0]) if self.start else 0

    def blocking_intervals(self) -> list[dict]:
        """Intervals where a job holds its machine after finishing."""
        out = []
        for k in range(self.m):
            for i, job in enumerate(self.sequence):
                f, d = self.finish[job][k], self.depart[job][k]
                if d > f:
                    out.append({"job": job, "machine": k, "from": f, "to": d})
        out.sort(key=lambda b: (b["machine"], b["from"], b["job"]))
        return out

    def occupancy_steps(self, stage: int) -> list[list[int]]:
        """Step function of buffer occupancy at ``stage`` as [t, count] pairs."""
        if not 0 <= stage < self.m - 1:
            raise ValidationError(f"stage {stage} out of range [0, {self.m - 1})")
        deltas: dict[int, int] = {}
        for job in range(self.n):
            enter = self.depart[job][stage]
            leave = self.start[job][stage + 1]
            if leave > enter:
                deltas[enter] = deltas.get(enter, 0) + 1
                deltas[leave] = deltas.get(leave, 0) - 1
        steps = []
        count = 0
        for t in sorted(deltas):
            if deltas[t] == 0:
                continue
            count += deltas[t]
            steps.append([t, count])
        return steps

    def to_document(self) -> dict:
        """Canonical timeline document used by the CLI and service."""
        return {
            "sequence": list(self.sequence),
            "machines": self.m,
            "jobs": self.n,
            "buffers": list(self.buffers),
            "makespan": self.makespan,
            "start": [list(r) for r in self.start],
            "finish": [list(r) for r in self.finish],
            "depart": [list(r) for r in self.depart],
            "blocking": self.blocking_intervals(),
            "buffer_occupancy": [self.occupancy_steps(k) for k in range(self.m - 1)],
        }


def evaluate_timeline(
    instance: Instance,
    sequence: Iterable[int],
    buffers: SeqT[int | None] | None = None,
) -> ScheduleTimeline:
    """Exact timeline for a job sequence under the instance's (or given) buffers."""
    seq = validate_sequence(instance, sequence)
    builder = TimelineBuilder(instance, buffers)
    for job in seq:
        builder.append(job)
    return builder.build()


def makespan(
    instance: Instance,
    sequence: Iterable[int],
    buffers: SeqT[int | None] | None = None,
) -> int:
    """Completion time of the last sequenced job on the last machine."""
    return evaluate_timeline(instance, sequence, buffers).makespan


def buffer_occupancy(timeline: ScheduleTimeline, stage: int, t) -> int:
    """Jobs that have departed machine ``stage`` but not started machine ``stage+1`` at time ``t``."""
    if not 0 <= stage < timeline.m - 1:
        raise ValidationError(f"stage {stage} out of range [0, {timeline.m - 1})")
    count = 0
    for job in range(timeline.n):
        if timeline.depart[job][stage] <= t < timeline.start[job][stage + 1]:
            count += 1
    return count
