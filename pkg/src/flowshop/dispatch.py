"""Priority-rule dispatching: job attributes, state-indexed weight vectors,
and the non-delay list scheduler that turns a rule-set into a job sequence.

A rule-set holds one integer weight vector per cell of a state-space
decomposition. At every selection step the scheduler reads the current
production state, picks the matching cell, scores each unscheduled job as the
dot product of that cell's weights with the job's attributes, and appends the
highest-priority job to the schedule.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Iterable

import numpy as np

from .model import Instance, ScheduleTimeline, TimelineBuilder, ValidationError

DEFAULT_FEATURES = ("completion_fraction", "first_buffer_load")
DEFAULT_BIN_EDGES = ((0.25, 0.5, 0.75), (0.5,))
TIEBREAKS = ("lowest_index", "highest_index")
STATE_MODES = ("per_decision", "per_problem")

_PROC_TIME_RE = re.compile(r"^proc_time_(\d+)$")


# ---------------------------------------------------------------------------
# Job attributes


def _resolve_attribute(name: str) -> Callable[[Instance, int], int]:
    if name == "proc_time_total":
        return lambda inst, j: sum(inst.p[j])
    match = _PROC_TIME_RE.match(name)
    if match:
        k = int(match.group(1))

        def extractor(inst: Instance, j: int, _k=k) -> int:
            if _k >= inst.m:
                raise ValidationError(
                    f"attribute 'proc_time_{_k}' needs machine {_k}, instance has m={inst.m}"
                )
            return inst.p[j][_k]

        return extractor
    raise ValidationError(f"unknown attribute name '{name}'")


@dataclass(frozen=True)
class DispatchConfig:
    """Attribute, decomposition and policy settings for the list scheduler.

    ``machine_count`` pins the machine count the attribute set was written
    for; dispatching an instance with a different m is rejected. None skips
    the check (custom attribute sets that work for any shop).
    """

    attributes: tuple[str, ...] = ("proc_time_0", "proc_time_1")
    machine_count: int | None = 2
    features: tuple[str, ...] = DEFAULT_FEATURES
    bin_edges: tuple[tuple[float, ...], ...] = DEFAULT_BIN_EDGES
    tiebreak: str = "lowest_index"
    state_evaluation: str = "per_decision"

    def __post_init__(self):
        if not self.attributes:
            raise ValidationError("attribute list is empty")
        for name in self.attributes:
            _resolve_attribute(name)
        for name in self.features:
            if name not in FEATURES:
                raise ValidationError(f"unknown state feature '{name}'")
        if len(self.bin_edges) != len(self.features):
            raise ValidationError(
                f"bin_edges has {len(self.bin_edges)} axes, expected {len(self.features)}"
            )
        if self.tiebreak not in TIEBREAKS:
            raise ValidationError(f"unknown tie-break policy '{self.tiebreak}'")
        if self.state_evaluation not in STATE_MODES:
            raise ValidationError(f"unknown state evaluation mode '{self.state_evaluation}'")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def decomposition(self) -> "StateDecomposition":
        return StateDecomposition.grid(self.features, self.bin_edges)

    def check_instance(self, instance: Instance) -> None:
        if self.machine_count is not None and instance.m != self.machine_count:
            raise ValidationError(
                f"attribute configuration requires m={self.machine_count}, instance has m={instance.m}"
            )
        for name in self.attributes:
            match = _PROC_TIME_RE.match(name)
            if match and int(match.group(1)) >= instance.m:
                raise ValidationError(
                    f"attribute '{name}' needs machine {match.group(1)}, instance has m={instance.m}"
                )

    def to_document(self) -> dict:
        return {
            "attributes": list(self.attributes),
            "machine_count": self.machine_count,
            "features": list(self.features),
            "bin_edges": [list(e) for e in self.bin_edges],
            "tiebreak": self.tiebreak,
            "state_evaluation": self.state_evaluation,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "DispatchConfig":
        kwargs = {}
        if "attributes" in doc:
            kwargs["attributes"] = tuple(doc["attributes"])
        if "machine_count" in doc:
            kwargs["machine_count"] = doc["machine_count"]
        if "features" in doc:
            kwargs["features"] = tuple(doc["features"])
        if "bin_edges" in doc:
            kwargs["bin_edges"] = tuple(tuple(e) for e in doc["bin_edges"])
        if "tiebreak" in doc:
            kwargs["tiebreak"] = doc["tiebreak"]
        if "state_evaluation" in doc:
            kwargs["state_evaluation"] = doc["state_evaluation"]
        return cls(**kwargs)


def job_attributes(instance: Instance, j: int, config: DispatchConfig | None = None) -> tuple[int, ...]:
    """Attribute vector of job ``j`` under the configured extractors."""
    cfg = config or DispatchConfig()
    cfg.check_instance(instance)
    if not 0 <= j < instance.n:
        raise ValidationError(f"job index {j} out of range [0, {instance.n})")
    return tuple(_resolve_attribute(name)(instance, j) for name in cfg.attributes)


def attribute_matrix(instance: Instance, config: DispatchConfig | None = None) -> np.ndarray:
    """All jobs' attribute vectors as an (n, n_attributes) int64 array."""
    cfg = config or DispatchConfig()
    cfg.check_instance(instance)
    extractors = [_resolve_attribute(name) for name in cfg.attributes]
    return np.array(
        [[ex(instance, j) for ex in extractors] for j in range(instance.n)], dtype=np.int64
    )


def priority(weights: Iterable[int], attributes: Iterable[int]):
    """Job priority: dot product of a weight vector with an attribute vector."""
    w = tuple(weights)
    a = tuple(attributes)
    if len(w) != len(a):
        raise ValidationError(f"weight vector length {len(w)} != attribute vector length {len(a)}")
    return sum(wi * ai for wi, ai in zip(w, a))


# ---------------------------------------------------------------------------
# Production state


@dataclass
class DispatchContext:
    """What the state features may look at: the instance, the jobs already
    sequenced, and the partial timeline built so far."""

    instance: Instance
    builder: TimelineBuilder

    @property
    def sequenced(self) -> list[int]:
        return self.builder.sequence


def _completion_fraction(ctx: DispatchContext) -> float:
    return len(ctx.builder.sequence) / ctx.instance.n


def _first_buffer_load(ctx: DispatchContext) -> float:
    if ctx.instance.m < 2 or not ctx.builder.sequence:
        return 0.0
    cap = ctx.builder.buffers[0]
    if cap is None or cap == 0:
        return 0.0
    return ctx.builder.stage_occupancy_now(0) / cap


FEATURES: dict[str, Callable[[DispatchContext], float]] = {
    "completion_fraction": _completion_fraction,
    "first_buffer_load": _first_buffer_load,
}


def extract_state(ctx: DispatchContext, features: tuple[str, ...] = DEFAULT_FEATURES) -> tuple[float, ...]:
    """Evaluate the configured state features; every value lands in [0, 1]."""
    return tuple(FEATURES[name](ctx) for name in features)


# ---------------------------------------------------------------------------
# State-space decomposition


@dataclass(frozen=True)
class StateDecomposition:
    """Partition of the state hypercube [0,1]^d into axis-aligned cells.

    Cell intervals are closed below and open above, except at the top edge
    1.0 which is closed so the cells cover the cube exactly. ``grid_edges``
    is set when the cells come from per-axis bin edges (the common case) and
    enables O(d log bins) lookup.
    """

    features: tuple[str, ...]
    cells: tuple[tuple[tuple[float, float], ...], ...]
    grid_edges: tuple[tuple[float, ...], ...] | None = None

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def dims(self) -> int:
        return len(self.features)

    @classmethod
    def grid(cls, features: Iterable[str], bin_edges: Iterable[Iterable[float]]) -> "StateDecomposition":
        features = tuple(features)
        edges = tuple(tuple(e) for e in bin_edges)
        if len(edges) != len(features):
            raise ValidationError(
                f"bin_edges has {len(edges)} axes, expected {len(features)}"
            )
        for axis, ax_edges in enumerate(edges):
            last = 0.0
            for e in ax_edges:
                if not 0.0 < e < 1.0:
                    raise ValidationError(f"bin edge {e} on axis {axis} outside (0, 1)")
                if e <= last:
                    raise ValidationError(f"bin edges on axis {axis} must be strictly increasing")
                last = e
        axis_bins = []
        for ax_edges in edges:
            bounds = (0.0,) + ax_edges + (1.0,)
            axis_bins.append([(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)])
        cells = tuple(tuple(box) for box in product(*axis_bins))
        return cls(features=features, cells=cells, grid_edges=edges)

    @classmethod
    def from_cells(cls, features: Iterable[str], cells: Iterable[Iterable[tuple[float, float]]]) -> "StateDecomposition":
        features = tuple(features)
        boxes = tuple(tuple((float(lo), float(hi)) for lo, hi in cell) for cell in cells)
        if not boxes:
            raise ValidationError("decomposition has no cells")
        d = len(features)
        volume = 0.0
        for idx, box in enumerate(boxes):
            if len(box) != d:
                raise ValidationError(f"cell {idx} has {len(box)} axes, expected {d}")
            v = 1.0
            for lo, hi in box:
                if not (0.0 <= lo < hi <= 1.0):
                    raise ValidationError(f"cell {idx} interval [{lo}, {hi}) is not inside [0, 1]")
                v *= hi - lo
            volume += v
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if all(max(a[0], b[0]) < min(a[1], b[1]) for a, b in zip(boxes[i], boxes[j])):
                    raise ValidationError(f"cells {i} and {j} overlap")
        if abs(volume - 1.0) > 1e-9:
            raise ValidationError(f"cells cover volume {volume}, expected 1")
        return cls(features=features, cells=boxes, grid_edges=None)

    def to_document(self) -> dict:
        return {
            "features": list(self.features),
            "cells": [[[lo, hi] for lo, hi in box] for box in self.cells],
            "grid_edges": [list(e) for e in self.grid_edges] if self.grid_edges else None,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "StateDecomposition":
        if doc.get("grid_edges"):
            return cls.grid(doc["features"], doc["grid_edges"])
        return cls.from_cells(doc["features"], doc["cells"])


def _contains(box: tuple[tuple[float, float], ...], s: tuple[float, ...]) -> bool:
    for (lo, hi), x in zip(box, s):
        upper_ok = x < hi or (hi == 1.0 and x == 1.0)
        if not (lo <= x and upper_ok):
            return False
    return True


def select_cell(decomposition: StateDecomposition, s: Iterable[float]) -> int:
    """Index of the unique cell containing state point ``s``."""
    point = tuple(s)
    if len(point) != decomposition.dims:
        raise ValidationError(
            f"state point has {len(point)} coordinates, expected {decomposition.dims}"
        )
    if decomposition.grid_edges is not None:
        index = 0
        for ax_edges, x in zip(decomposition.grid_edges, point):
            if not 0.0 <= x <= 1.0:
                raise ValidationError(f"state point {point} outside all cells")
            index = index * (len(ax_edges) + 1) + bisect_right(ax_edges, x)
        return index
    for idx, box in enumerate(decomposition.cells):
        if _contains(box, point):
            return idx
    raise ValidationError(f"state point {point} outside all cells")


# ---------------------------------------------------------------------------
# Rule-sets


@dataclass(frozen=True)
class RuleSet:
    """One integer weight vector per decomposition cell."""

    decomposition: StateDecomposition
    weights: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.weights) != self.decomposition.n_cells:
            raise ValidationError(
                f"rule-set has {len(self.weights)} weight vectors, "
                f"decomposition has {self.decomposition.n_cells} cells"
            )
        lengths = {len(w) for w in self.weights}
        if len(lengths) > 1:
            raise ValidationError("weight vectors have inconsistent lengths")

    @property
    def n_attributes(self) -> int:
        return len(self.weights[0]) if self.weights else 0

    def to_document(self) -> dict:
        return {
            "decomposition": self.decomposition.to_document(),
            "weights": [list(w) for w in self.weights],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "RuleSet":
        return cls(
            decomposition=StateDecomposition.from_document(doc["decomposition"]),
            weights=tuple(tuple(int(x) for x in w) for w in doc["weights"]),
        )


def uniform_ruleset(weights: Iterable[int], features=("completion_fraction",)) -> RuleSet:
    """Single-cell rule-set: one weight vector applied in every state."""
    dec = StateDecomposition.grid(features, [()] * len(tuple(features)))
    return RuleSet(decomposition=dec, weights=(tuple(weights),))


# ---------------------------------------------------------------------------
# The list scheduler


def _pick(tiebreak: str, scores: list, candidates: list[int]) -> int:
    best = None
    best_score = None
    for j in candidates:
        s = scores[j]
        if best is None or s > best_score or (s == best_score and tiebreak == "highest_index"):
            best, best_score = j, s
    return best


def _dispatch_generic(
    instance: Instance,
    ruleset: RuleSet,
    cfg: DispatchConfig,
    buffers,
) -> TimelineBuilder:
    attrs = [job_attributes(instance, j, cfg) for j in range(instance.n)]
    builder = TimelineBuilder(instance, buffers)
    ctx = DispatchContext(instance=instance, builder=builder)
    features = ruleset.decomposition.features
    remaining = list(range(instance.n))
    fixed_cell = None
    if cfg.state_evaluation == "per_problem":
        fixed_cell = select_cell(ruleset.decomposition, extract_state(ctx, features))
    while remaining:
        if fixed_cell is not None:
            cell = fixed_cell
        else:
            cell = select_cell(ruleset.decomposition, extract_state(ctx, features))
        w = ruleset.weights[cell]
        scores = [None] * instance.n
        for j in remaining:
            scores[j] = priority(w, attrs[j])
        job = _pick(cfg.tiebreak, scores, remaining)
        remaining.remove(job)
        builder.append(job)
    return builder


def _dispatch_fast(
    instance: Instance,
    ruleset: RuleSet,
    cfg: DispatchConfig,
    buffers,
) -> TimelineBuilder:
    """Hot path for grid decompositions over the two default features.

    Per cell, the descending-priority order (ties by lowest index) is fixed
    once the weights are known, so each selection is a pointer walk over a
    presorted order instead of a fresh argmax.
    """
    n = instance.n
    attrs = attribute_matrix(instance, cfg)
    weights = np.array(ruleset.weights, dtype=np.int64)
    alpha = attrs @ weights.T
    orders = np.argsort(-alpha, axis=0, kind="stable")
    order_lists = [orders[:, c].tolist() for c in range(ruleset.decomposition.n_cells)]

    f1_edges, f2_edges = ruleset.decomposition.grid_edges
    n_f2_bins = len(f2_edges) + 1
    f1_bin_at_step = [bisect_right(f1_edges, step / n) for step in range(n)]
    builder = TimelineBuilder(instance, buffers)
    cap = builder.buffers[0] if instance.m >= 2 else None
    if cap is None or cap == 0:
        f2_bin_for_occupancy = None
        zero_f2_bin = bisect_right(f2_edges, 0.0)
    else:
        f2_bin_for_occupancy = [bisect_right(f2_edges, occ / cap) for occ in range(cap + 1)]
        zero_f2_bin = f2_bin_for_occupancy[0]

    single_eval = cfg.state_evaluation == "per_problem"
    pointers = [0] * len(order_lists)
    picked = bytearray(n)
    fixed_cell = None
    for step in range(n):
        if fixed_cell is not None:
            cell = fixed_cell
        else:
            if step == 0 or f2_bin_for_occupancy is None:
                f2_bin = zero_f2_bin
            else:
                f2_bin = f2_bin_for_occupancy[builder.stage_occupancy_now(0)]
            cell = f1_bin_at_step[step] * n_f2_bins + f2_bin
            if single_eval:
                fixed_cell = cell
        order = order_lists[cell]
        ptr = pointers[cell]
        while picked[order[ptr]]:
            ptr += 1
        pointers[cell] = ptr + 1
        job = order[ptr]
        picked[job] = 1
        builder.append(job)
    return builder


def _fast_path_ok(ruleset: RuleSet, cfg: DispatchConfig) -> bool:
    dec = ruleset.decomposition
    return (
        dec.grid_edges is not None
        and dec.features == DEFAULT_FEATURES
        and cfg.tiebreak == "lowest_index"
    )


def dispatch_schedule(
    instance: Instance,
    ruleset: RuleSet,
    tiebreak: str | None = None,
    config: DispatchConfig | None = None,
    buffers=None,
) -> tuple[tuple[int, ...], ScheduleTimeline]:
    """Build a complete schedule by repeated highest-priority selection.

    Returns the emitted job sequence and its timeline; the timeline is
    identical to evaluating the sequence from scratch.
    """
    cfg = config or DispatchConfig()
    if tiebreak is not None:
        cfg = replace(cfg, tiebreak=tiebreak)
    cfg.check_instance(instance)
    if ruleset.n_attributes != cfg.n_attributes:
        raise ValidationError(
            f"rule-set weight length {ruleset.n_attributes} != attribute count {cfg.n_attributes}"
        )
    if _fast_path_ok(ruleset, cfg):
        builder = _dispatch_fast(instance, ruleset, cfg, buffers)
    else:
        builder = _dispatch_generic(instance, ruleset, cfg, buffers)
    return tuple(builder.sequence), builder.build()
