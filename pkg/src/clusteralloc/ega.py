"""Extended genetic algorithm over node combinations.

One generation runs, in order:

1. crossover: ``crossover_pairs_per_generation`` random parent pairs swap the
   node at one position; children that would repeat a node are dropped;
2. swap mutation: each pool member, with ``mutation_probability``, has two of
   its nodes interchanged.  For a set this is the identity, so the copy is
   simply appended to the pool and its combination gets more roulette mass;
3. selection: the ``elitism_count`` best pool members survive unconditionally,
   the rest of the population is drawn with replacement from a roulette wheel
   weighted by ``1 / (1 + fitness_deviation)``.

All randomness comes from one ``random.Random(rng_seed)`` consumed in a fixed
order, so a run is reproducible from its config alone.
"""

from __future__ import annotations

import csv
import logging
import random
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence, TextIO

from .exact import InfeasibleRequestError
from .fitness import Combination, FitnessReport, Request, ShapeMode, evaluate
from .inventory import Fleet

__all__ = [
    "EgaConfig",
    "Individual",
    "GenerationTrace",
    "Problem",
    "SmallPopulationWarning",
    "init_population",
    "crossover",
    "swap_mutation",
    "roulette_weights",
    "select_next_generation",
    "evolve",
    "write_traces",
    "read_config",
    "TRACE_HEADER",
]

log = logging.getLogger(__name__)

TRACE_HEADER = [
    "generation",
    "best_fitness_deviation",
    "mean_fitness_deviation",
    "mean_match_ratio",
    "best_combo",
]


class SmallPopulationWarning(UserWarning):
    """Population is smaller than the number of available nodes."""


@dataclass(frozen=True)
class EgaConfig:
    population_size: int = 20
    max_generations: int = 100
    elitism_count: int = 1
    # None: half the population, at least one pair
    crossover_pairs_per_generation: int | None = None
    mutation_probability: float = 0.1
    rng_seed: int = 0
    mode: ShapeMode = ShapeMode.ABSOLUTE
    stop_on_stagnation: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ShapeMode(self.mode))
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 1 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [1, population_size)")
        if self.max_generations < 1:
            raise ValueError("max_generations must be positive")
        if self.crossover_pairs_per_generation is not None and self.crossover_pairs_per_generation < 1:
            raise ValueError("crossover_pairs_per_generation must be positive")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation_probability must lie in [0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.stop_on_stagnation is not None and self.stop_on_stagnation < 1:
            raise ValueError("stop_on_stagnation must be positive")

    @property
    def crossover_pairs(self) -> int:
        if self.crossover_pairs_per_generation is not None:
            return self.crossover_pairs_per_generation
        return max(1, self.population_size // 2)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["mode"] = self.mode.value
        return d


@dataclass(frozen=True)
class Individual:
    combo: Combination
    report: FitnessReport

    @property
    def deviation(self) -> int:
        return self.report.fitness_deviation

    def rank_key(self) -> tuple:
        return (self.report.fitness_deviation, self.report.capacity_deviation, self.combo.node_ids)


@dataclass(frozen=True)
class GenerationTrace:
    generation_index: int
    best_fitness_deviation: int
    mean_fitness_deviation: float
    mean_match_ratio: float
    best_combo: Combination

    def row(self) -> list:
        return [
            self.generation_index,
            self.best_fitness_deviation,
            repr(self.mean_fitness_deviation),
            repr(self.mean_match_ratio),
            str(self.best_combo),
        ]


class Problem:
    """Fleet, request and shape mode, with a memo of evaluated combinations."""

    def __init__(self, fleet: Fleet, request: Request, mode: ShapeMode = ShapeMode.ABSOLUTE):
        if request.n_request > len(fleet):
            raise InfeasibleRequestError(
                f"{request.n_request} nodes requested but only {len(fleet)} available"
            )
        self.fleet = fleet
        self.request = request
        self.mode = ShapeMode(mode)
        self.ids = fleet.ids
        self._memo: dict[tuple[int, ...], Individual] = {}

    def individual(self, combo: Combination) -> Individual:
        ind = self._memo.get(combo.node_ids)
        if ind is None:
            ind = Individual(combo, evaluate(combo, self.fleet, self.request, self.mode))
            self._memo[combo.node_ids] = ind
        return ind

    def random_individual(self, rng: random.Random) -> Individual:
        return self.individual(Combination(tuple(rng.sample(self.ids, self.request.n_request))))


def init_population(problem: Problem, config: EgaConfig, rng: random.Random) -> list[Individual]:
    """Random valid combinations; the same combination may appear more than once."""
    if config.population_size < len(problem.fleet):
        warnings.warn(
            f"population {config.population_size} is smaller than the "
            f"{len(problem.fleet)} available nodes",
            SmallPopulationWarning,
            stacklevel=2,
        )
    return [problem.random_individual(rng) for _ in range(config.population_size)]


def crossover(
    parent_a: Individual,
    parent_b: Individual,
    rng: random.Random,
    problem: Problem,
    position: int | None = None,
) -> list[Individual]:
    """Exchange the node at one position between two parents.

    Positions index the ascending id lists.  A child that ends up holding the
    same node twice is discarded, so zero, one or two children come back.
    """
    a = list(parent_a.combo.node_ids)
    b = list(parent_b.combo.node_ids)
    if position is None:
        position = rng.randrange(len(a))
    a[position], b[position] = b[position], a[position]
    children = []
    for genes in (a, b):
        if len(set(genes)) == len(genes):
            children.append(problem.individual(Combination(tuple(genes))))
    return children


def swap_mutation(individual: Individual, rng: random.Random) -> Individual:
    """Interchange two nodes inside the combination.

    The result is set-equal to the input, so the fitness report is carried
    over as is.
    """
    genes = list(individual.combo.node_ids)
    if len(genes) >= 2:
        i, j = rng.sample(range(len(genes)), 2)
        genes[i], genes[j] = genes[j], genes[i]
    return Individual(Combination(tuple(genes)), individual.report)


def roulette_weights(pool: Sequence[Individual]) -> list[float]:
    """Wheel slices in percent; lower deviation gets a wider slice."""
    if not pool:
        raise ValueError("empty pool")
    raw = [1.0 / (1.0 + ind.deviation) for ind in pool]
    total = sum(raw)
    return [100.0 * w / total for w in raw]


def select_next_generation(
    pool: Sequence[Individual], config: EgaConfig, rng: random.Random
) -> list[Individual]:
    elite = sorted(pool, key=Individual.rank_key)[: config.elitism_count]
    weights = roulette_weights(pool)
    drawn = rng.choices(pool, weights=weights, k=config.population_size - len(elite))
    return elite + drawn


def _trace(index: int, population: Sequence[Individual]) -> GenerationTrace:
    best = min(population, key=Individual.rank_key)
    return GenerationTrace(
        generation_index=index,
        best_fitness_deviation=best.deviation,
        mean_fitness_deviation=fmean(ind.deviation for ind in population),
        mean_match_ratio=fmean(ind.report.match_ratio for ind in population),
        best_combo=best.combo,
    )


def evolve(
    fleet: Fleet,
    request: Request,
    config: EgaConfig,
) -> tuple[Individual, list[GenerationTrace]]:
    """Run the search and return the best individual plus one trace per generation.

    Generation 0 is the random initial population.
    """
    problem = Problem(fleet, request, config.mode)
    rng = random.Random(config.rng_seed)
    population = init_population(problem, config, rng)
    best = min(population, key=Individual.rank_key)
    traces = [_trace(0, population)]
    stale = 0

    for generation in range(1, config.max_generations + 1):
        pool = list(population)
        for _ in range(config.crossover_pairs):
            i, j = rng.sample(range(len(population)), 2)
            pool.extend(crossover(population[i], population[j], rng, problem))
        for ind in list(pool):
            if rng.random() < config.mutation_probability:
                pool.append(swap_mutation(ind, rng))
        population = select_next_generation(pool, config, rng)

        trace = _trace(generation, population)
        traces.append(trace)
        if trace.best_fitness_deviation < best.deviation:
            stale = 0
        else:
            stale += 1
        best = min(best, population[0], key=Individual.rank_key)
        if config.stop_on_stagnation is not None and stale >= config.stop_on_stagnation:
            log.debug("stopping after %d stagnant generations", stale)
            break

    return best, traces


def write_traces(traces: Iterable[GenerationTrace], dest: str | Path | TextIO) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_traces(traces, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for t in traces:
        writer.writerow(t.row())


def read_config(source: str | Path, base: EgaConfig | None = None) -> EgaConfig:
    """Read ``key = value`` lines named after :class:`EgaConfig` fields."""
    types = {
        "population_size": int,
        "max_generations": int,
        "elitism_count": int,
        "crossover_pairs_per_generation": int,
        "mutation_probability": float,
        "rng_seed": int,
        "mode": ShapeMode,
        "stop_on_stagnation": int,
    }
    values: dict = {}
    text = Path(source).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in types:
            raise ValueError(f"{source}:{lineno}: unknown or malformed entry {raw.strip()!r}")
        if value.lower() in ("", "none"):
            values[key] = None
        else:
            values[key] = types[key](value)
    return replace(base or EgaConfig(), **values)
