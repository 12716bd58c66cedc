"""Estimator-style wrappers around the schedulers.

The learner surface follows the scikit-learn protocol: constructor arguments
are plain hyper-parameters, ``fit`` learns (or validates) state, ``predict``
maps instances to job sequences, and learned attributes carry a trailing
underscore. ``get_params``/``set_params`` come from ``BaseEstimator``, so the
wrappers compose with sklearn model-selection utilities.

``GbmlScheduler`` is a genuine learner: ``fit`` evolves one rule-set over the
training instances and ``predict`` dispatches unseen instances with it.
``JohnsonScheduler`` and ``AnnealingScheduler`` have nothing to learn —
``fit`` only validates — and ``predict`` applies the rule / runs the search
per instance.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import SaConfig, johnson_sequence, simulated_annealing
from .dispatch import DispatchConfig, dispatch_schedule
from .gbml import GbmlConfig, evolve
from .model import Instance, ValidationError, makespan, validate_instance


def as_instance(x) -> Instance:
    """Validation helper: accept an Instance or a raw instance document."""
    if isinstance(x, Instance):
        return x
    if isinstance(x, dict):
        return validate_instance(x)
    raise ValidationError(f"expected an instance or instance document, got {type(x).__name__}")


def as_instances(X) -> list[Instance]:
    if isinstance(X, (Instance, dict)):
        X = [X]
    instances = [as_instance(x) for x in X]
    if not instances:
        raise ValidationError("expected at least one instance")
    return instances


class JohnsonScheduler(BaseEstimator):
    """Exact two-machine ordering rule behind the estimator protocol."""

    def fit(self, X, y=None):
        for inst in as_instances(X):
            if inst.m != 2:
                raise ValidationError("the two-machine rule needs machine_count == 2")
        self.fitted_ = True
        return self

    def predict(self, X):
        check_is_fitted(self)
        return [list(johnson_sequence(inst)) for inst in as_instances(X)]

    def score(self, X, y=None):
        """Negative mean makespan (greater is better)."""
        check_is_fitted(self)
        instances = as_instances(X)
        seqs = self.predict(instances)
        return -sum(makespan(i, s) for i, s in zip(instances, seqs)) / len(instances)


class AnnealingScheduler(BaseEstimator):
    """Per-instance simulated-annealing search; ``fit`` only validates."""

    def __init__(self, iterations=5000, cooling_rate=0.95, neighborhood="swap",
                 moves_per_temperature=None, initial_temperature=None,
                 probe_moves=100, seed=None):
        self.iterations = iterations
        self.cooling_rate = cooling_rate
        self.neighborhood = neighborhood
        self.moves_per_temperature = moves_per_temperature
        self.initial_temperature = initial_temperature
        self.probe_moves = probe_moves
        self.seed = seed

    def _config(self) -> SaConfig:
        return SaConfig(
            iterations=self.iterations,
            cooling_rate=self.cooling_rate,
            neighborhood=self.neighborhood,
            moves_per_temperature=self.moves_per_temperature,
            initial_temperature=self.initial_temperature,
            probe_moves=self.probe_moves,
        )

    def fit(self, X, y=None):
        as_instances(X)
        self._config()  # validates hyper-parameters
        self.fitted_ = True
        return self

    def predict(self, X):
        check_is_fitted(self)
        cfg = self._config()
        return [list(simulated_annealing(inst, cfg, seed=self.seed).sequence)
                for inst in as_instances(X)]

    def score(self, X, y=None):
        check_is_fitted(self)
        instances = as_instances(X)
        seqs = self.predict(instances)
        return -sum(makespan(i, s) for i, s in zip(instances, seqs)) / len(instances)


class GbmlScheduler(BaseEstimator):
    """Evolves one dispatching rule-set on the training instances.

    After ``fit``: ``ruleset_`` (the evolved weights), ``objective_`` (mean
    training makespan), ``history_`` (per-generation records), ``result_``
    (the full evolution result).
    """

    def __init__(self, population_size=50, generations=100, weight_bound=10,
                 p_crossover=0.8, p_mutation=0.05, elitism_count=1,
                 fitness_base=None, dispatch=None, seed=None):
        self.population_size = population_size
        self.generations = generations
        self.weight_bound = weight_bound
        self.p_crossover = p_crossover
        self.p_mutation = p_mutation
        self.elitism_count = elitism_count
        self.fitness_base = fitness_base
        self.dispatch = dispatch
        self.seed = seed

    def _config(self) -> GbmlConfig:
        kwargs = dict(
            population_size=self.population_size,
            generations=self.generations,
            weight_bound=self.weight_bound,
            p_crossover=self.p_crossover,
            p_mutation=self.p_mutation,
            elitism_count=self.elitism_count,
            fitness_base=self.fitness_base,
        )
        if self.dispatch is not None:
            kwargs["dispatch"] = (self.dispatch if isinstance(self.dispatch, DispatchConfig)
                                  else DispatchConfig.from_document(self.dispatch))
        return GbmlConfig(**kwargs)

    def fit(self, X, y=None):
        instances = as_instances(X)
        result = evolve(instances, self._config(), seed=self.seed)
        self.result_ = result
        self.ruleset_ = result.ruleset
        self.objective_ = result.objective
        self.history_ = result.history
        return self

    def predict(self, X):
        check_is_fitted(self, "ruleset_")
        cfg = self._config().dispatch
        return [list(dispatch_schedule(inst, self.ruleset_, config=cfg)[0])
                for inst in as_instances(X)]

    def score(self, X, y=None):
        """Negative mean makespan of the dispatched sequences."""
        check_is_fitted(self, "ruleset_")
        instances = as_instances(X)
        seqs = self.predict(instances)
        return -sum(makespan(i, s) for i, s in zip(instances, seqs)) / len(instances)
