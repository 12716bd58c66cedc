"""Flow-shop scheduling with finite intermediate buffers: exact timeline
evaluation, rule-set dispatching, an evolutionary rule learner, and
reference methods to compare against.
"""

from .model import (
    Instance,
    ScheduleTimeline,
    TimelineBuilder,
    ValidationError,
    buffer_occupancy,
    canonical_json,
    evaluate_timeline,
    make_instance,
    makespan,
    validate_instance,
    validate_sequence,
    with_buffers,
)
from .dispatch import (
    DispatchConfig,
    RuleSet,
    StateDecomposition,
    dispatch_schedule,
    job_attributes,
    priority,
    select_cell,
)
from .gbml import GbmlConfig, GbmlResult, decode, evolve
from .baselines import (
    SaConfig,
    SaResult,
    brute_force_optimal,
    johnson_sequence,
    simulated_annealing,
)
from .bench import ExperimentPlan, ResultTable, emit_report, generate_instance, run_experiment
from .estimators import AnnealingScheduler, GbmlScheduler, JohnsonScheduler

__version__ = "0.1.0"

__all__ = [
    "Instance",
    "ScheduleTimeline",
    "TimelineBuilder",
    "ValidationError",
    "buffer_occupancy",
    "canonical_json",
    "evaluate_timeline",
    "make_instance",
    "makespan",
    "validate_instance",
    "validate_sequence",
    "with_buffers",
    "DispatchConfig",
    "RuleSet",
    "StateDecomposition",
    "dispatch_schedule",
    "job_attributes",
    "priority",
    "select_cell",
    "GbmlConfig",
    "GbmlResult",
    "decode",
    "evolve",
    "SaConfig",
    "SaResult",
    "brute_force_optimal",
    "johnson_sequence",
    "simulated_annealing",
    "ExperimentPlan",
    "ResultTable",
    "emit_report",
    "generate_instance",
    "run_experiment",
    "AnnealingScheduler",
    "GbmlScheduler",
    "JohnsonScheduler",
    "__version__",
]
