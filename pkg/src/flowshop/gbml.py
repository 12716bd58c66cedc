"""Evolutionary search over rule-sets.

An individual is a flat integer genome, one gene per (cell, attribute) pair
in cell-major order. The loop evaluates each individual by dispatching every
training instance with the decoded rule-set, converts mean makespans into
fitness by normalizing against the population mean per instance, and breeds
the next generation with remainder stochastic sampling, one-point crossover,
per-gene redraw mutation, and elitism on the raw objective.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .dispatch import DispatchConfig, RuleSet, StateDecomposition, dispatch_schedule
from .model import Instance, ValidationError

Genome = tuple[int, ...]


@dataclass(frozen=True)
class GbmlConfig:
    population_size: int = 50
    generations: int = 100
    weight_bound: int = 10
    p_crossover: float = 0.8
    p_mutation: float = 0.05
    elitism_count: int = 1
    fitness_base: float | None = None  # None: twice the training-set size
    dispatch: DispatchConfig = field(default_factory=DispatchConfig)

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be at least 2")
        if self.generations < 1:
            raise ValidationError("generations must be at least 1")
        if self.weight_bound < 0:
            raise ValidationError("weight_bound must be non-negative")
        if not 0.0 <= self.p_crossover <= 1.0:
            raise ValidationError("p_crossover must be in [0, 1]")
        if not 0.0 <= self.p_mutation <= 1.0:
            raise ValidationError("p_mutation must be in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValidationError("elitism_count must be in [0, population_size)")
        if self.fitness_base is not None and self.fitness_base <= 0:
            raise ValidationError("fitness_base must be positive")

    def resolved_fitness_base(self, n_problems: int) -> float:
        return 2.0 * n_problems if self.fitness_base is None else float(self.fitness_base)

    def to_document(self) -> dict:
        return {
            "population_size": self.population_size,
            "generations": self.generations,
            "weight_bound": self.weight_bound,
            "p_crossover": self.p_crossover,
            "p_mutation": self.p_mutation,
            "elitism_count": self.elitism_count,
            "fitness_base": self.fitness_base,
            "dispatch": self.dispatch.to_document(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "GbmlConfig":
        kwargs = {k: doc[k] for k in (
            "population_size", "generations", "weight_bound", "p_crossover",
            "p_mutation", "elitism_count", "fitness_base",
        ) if k in doc}
        if "dispatch" in doc:
            kwargs["dispatch"] = DispatchConfig.from_document(doc["dispatch"])
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Genome encoding


def genome_length(decomposition: StateDecomposition, n_attributes: int) -> int:
    return decomposition.n_cells * n_attributes


def decode(genome: Sequence[int], decomposition: StateDecomposition, n_attributes: int) -> RuleSet:
    """Split a flat cell-major genome into per-cell weight vectors."""
    expected = genome_length(decomposition, n_attributes)
    if len(genome) != expected:
        raise ValidationError(f"genome length {len(genome)} != {expected}")
    weights = tuple(
        tuple(genome[c * n_attributes:(c + 1) * n_attributes])
        for c in range(decomposition.n_cells)
    )
    return RuleSet(decomposition=decomposition, weights=weights)


def init_population(rng: random.Random, size: int, length: int, bound: int) -> list[Genome]:
    return [
        tuple(rng.randint(-bound, bound) for _ in range(length))
        for _ in range(size)
    ]


# ---------------------------------------------------------------------------
# Fitness


@dataclass(frozen=True)
class FitnessReport:
    """Per-individual objectives and the relative fitness derived from them."""

    objectives: tuple[tuple[int, ...], ...]  # one row per individual, one column per problem
    problem_means: tuple[float, ...]
    fitness: tuple[float, ...]
    raw_objectives: tuple[float, ...]  # mean makespan per individual
    best_index: int

    @property
    def best_objective(self) -> float:
        return self.raw_objectives[self.best_index]


def evaluate_fitness(
    population: Sequence[Genome],
    instances: Sequence[Instance],
    config: GbmlConfig | None = None,
) -> FitnessReport:
    """Dispatch every training instance with every individual's rule-set and
    score the population."""
    cfg = config or GbmlConfig()
    if not instances:
        raise ValidationError("training set is empty")
    decomposition = cfg.dispatch.decomposition()
    n_attrs = cfg.dispatch.n_attributes
    cache: dict[Genome, tuple[int, ...]] = {}
    values = []
    for genome in population:
        row = cache.get(genome)
        if row is None:
            ruleset = decode(genome, decomposition, n_attrs)
            row = tuple(
                dispatch_schedule(inst, ruleset, config=cfg.dispatch)[1].makespan
                for inst in instances
            )
            cache[genome] = row
        values.append(row)
    return _fitness_report(values, cfg.resolved_fitness_base(len(instances)))


def _fitness_report(values: list[tuple[int, ...]], base: float) -> FitnessReport:
    fitnesses = population_fitness(values, base)
    raw = [sum(v) / len(v) for v in values]
    best = min(range(len(raw)), key=lambda i: raw[i])
    n_problems = len(values[0])
    means = tuple(sum(row[j] for row in values) / len(values) for j in range(n_problems))
    return FitnessReport(
        objectives=tuple(values),
        problem_means=means,
        fitness=tuple(fitnesses),
        raw_objectives=tuple(raw),
        best_index=best,
    )


def population_fitness(objectives: Sequence[Sequence[float]], fitness_base: float) -> list[float]:
    """Fitness of each individual from its per-problem objective values.

    Each problem's objectives are normalized by the population mean for that
    problem, summed per individual, and subtracted from the base constant;
    negative results clamp to zero. Lower objectives give higher fitness.
    """
    if not objectives:
        return []
    n_problems = len(objectives[0])
    size = len(objectives)
    means = [sum(row[j] for row in objectives) / size for j in range(n_problems)]
    out = []
    for row in objectives:
        normalized = sum(
            1.0 if means[j] == 0 else row[j] / means[j] for j in range(n_problems)
        )
        out.append(max(0.0, fitness_base - normalized))
    return out


def select_rsswr(rng: random.Random, fitnesses: Sequence[float], count: int) -> tuple[list[int], bool]:
    """Remainder stochastic sampling with replacement.

    Each index i gets floor(count * F_i / sum F) guaranteed copies; the
    leftover slots are drawn with replacement, weighted by the fractional
    parts. Returns the selected indices and whether the zero-total-fitness
    fallback (uniform draw) fired.
    """
    total = sum(fitnesses)
    if total <= 0.0:
        return [rng.randrange(len(fitnesses)) for _ in range(count)], True
    expected = [count * f / total for f in fitnesses]
    selected: list[int] = []
    fractions = []
    for i, e in enumerate(expected):
        base = math.floor(e)
        selected.extend([i] * base)
        fractions.append(e - base)
    remainder = count - len(selected)
    if remainder > 0:
        selected.extend(rng.choices(range(len(fitnesses)), weights=fractions, k=remainder))
    return selected, False


# ---------------------------------------------------------------------------
# Variation


def crossover(rng: random.Random, a: Genome, b: Genome, p: float) -> tuple[Genome, Genome]:
    """One-point crossover with probability p; otherwise unchanged copies."""
    if len(a) != len(b):
        raise ValidationError(f"genome lengths differ: {len(a)} != {len(b)}")
    if len(a) < 2 or rng.random() >= p:
        return a, b
    cut = rng.randint(1, len(a) - 1)
    return a[:cut] + b[cut:], b[:cut] + a[cut:]


def mutate(rng: random.Random, genome: Genome, p: float, bound: int) -> Genome:
    """Redraw each gene uniformly in [-bound, bound] with probability p."""
    return tuple(
        rng.randint(-bound, bound) if rng.random() < p else g for g in genome
    )


# ---------------------------------------------------------------------------
# The loop


@dataclass(frozen=True)
class GbmlResult:
    genome: Genome
    ruleset: RuleSet
    objective: float
    per_problem: tuple[int, ...]
    sequences: tuple[tuple[int, ...], ...]  # best rule-set's sequence per problem
    history: tuple[dict, ...]
    generations_run: int
    evaluations: int
    fallback_generations: int
    cancelled: bool

    def to_document(self) -> dict:
        return {
            "algorithm": "gbml",
            "objective": self.objective,
            "per_problem": list(self.per_problem),
            "ruleset": self.ruleset.to_document(),
            "generations_run": self.generations_run,
            "evaluations": self.evaluations,
            "fallback_generations": self.fallback_generations,
            "cancelled": self.cancelled,
            "history": [dict(h) for h in self.history],
        }


def evolve(
    instances: Sequence[Instance],
    config: GbmlConfig | None = None,
    seed: int | None = None,
    progress: Callable[[int, float], None] | None = None,
    cancel: Callable[[], bool] | None = None,
) -> GbmlResult:
    """Run the full evolutionary loop over the training instances.

    ``progress(generation, best_objective)`` fires after each generation's
    evaluation; ``cancel()`` is polled at the same point and a true value
    stops the run, returning the best individual found so far.
    """
    instances = list(instances)
    if not instances:
        raise ValidationError("training set is empty")
    cfg = config or GbmlConfig()
    for inst in instances:
        cfg.dispatch.check_instance(inst)
    decomposition = cfg.dispatch.decomposition()
    n_attrs = cfg.dispatch.n_attributes
    length = genome_length(decomposition, n_attrs)
    base = cfg.resolved_fitness_base(len(instances))
    rng = random.Random(seed)

    cache: dict[Genome, tuple[int, ...]] = {}
    evaluations = 0

    def per_problem(genome: Genome) -> tuple[int, ...]:
        nonlocal evaluations
        hit = cache.get(genome)
        if hit is not None:
            return hit
        ruleset = decode(genome, decomposition, n_attrs)
        values = tuple(
            dispatch_schedule(inst, ruleset, config=cfg.dispatch)[1].makespan
            for inst in instances
        )
        evaluations += 1
        cache[genome] = values
        return values

    def objective_of(values: tuple[int, ...]) -> float:
        return sum(values) / len(values)

    population = init_population(rng, cfg.population_size, length, cfg.weight_bound)
    best_genome: Genome | None = None
    best_values: tuple[int, ...] = ()
    best_objective = math.inf
    history: list[dict] = []
    fallbacks = 0
    cancelled = False
    generations_run = 0

    for gen in range(cfg.generations):
        values = [per_problem(g) for g in population]
        objectives = [objective_of(v) for v in values]
        order = sorted(range(len(population)), key=lambda i: objectives[i])
        gen_best = order[0]
        if objectives[gen_best] < best_objective:
            best_objective = objectives[gen_best]
            best_genome = population[gen_best]
            best_values = values[gen_best]

        fitnesses = population_fitness(values, base)
        fallback = sum(fitnesses) <= 0.0
        history.append({
            "generation": gen + 1,
            "best": objectives[gen_best],
            "mean": sum(objectives) / len(objectives),
            "best_fitness": max(fitnesses),
            "best_so_far": best_objective,
            "fallback": fallback,
        })
        generations_run = gen + 1
        if progress is not None:
            progress(gen + 1, best_objective)
        if cancel is not None and cancel():
            cancelled = True
            break
        if gen == cfg.generations - 1:
            break

        parent_indices, used_fallback = select_rsswr(rng, fitnesses, cfg.population_size)
        if used_fallback:
            fallbacks += 1
        children: list[Genome] = []
        for i in range(0, len(parent_indices) - 1, 2):
            a = population[parent_indices[i]]
            b = population[parent_indices[i + 1]]
            c1, c2 = crossover(rng, a, b, cfg.p_crossover)
            children.append(mutate(rng, c1, cfg.p_mutation, cfg.weight_bound))
            children.append(mutate(rng, c2, cfg.p_mutation, cfg.weight_bound))
        if len(parent_indices) % 2 == 1:
            lone = population[parent_indices[-1]]
            children.append(mutate(rng, lone, cfg.p_mutation, cfg.weight_bound))

        elites = [population[i] for i in order[:cfg.elitism_count]]
        population = elites + children[: cfg.population_size - len(elites)]

    assert best_genome is not None
    best_ruleset = decode(best_genome, decomposition, n_attrs)
    sequences = tuple(
        dispatch_schedule(inst, best_ruleset, config=cfg.dispatch)[0] for inst in instances
    )
    return GbmlResult(
        genome=best_genome,
        ruleset=best_ruleset,
        objective=best_objective,
        per_problem=best_values,
        sequences=sequences,
        history=tuple(history),
        generations_run=generations_run,
        evaluations=evaluations,
        fallback_generations=fallbacks,
        cancelled=cancelled,
    )


def history_csv(result: GbmlResult) -> str:
    """Generation log as CSV text."""
    lines = ["generation,best_objective,mean_objective,best_fitness"]
    for row in result.history:
        lines.append(
            f"{row['generation']},{_fmt(row['best'])},{_fmt(row['mean'])},"
            f"{_fmt(row['best_fitness'])}"
        )
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))
