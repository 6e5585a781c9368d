"""Convergence experiments on synthetic fleets.

For each (request case, population size) cell the harness solves the case
exactly once, then runs ``repetitions`` seeded searches and aggregates their
traces into a per-generation curve.  Everything downstream of
``ExperimentSpec`` is deterministic; per-run seeds come from
:func:`run_seed`.
"""

from __future__ import annotations

import csv
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean, median

import numpy as np

from .ega import EgaConfig, GenerationTrace, evolve
from .exact import ExactResult, solve_exact
from .fitness import Request
from .inventory import Fleet, Node, derive_classes, save_fleet

__all__ = [
    "ExperimentSpec",
    "CellResult",
    "ExperimentReport",
    "default_cases",
    "generate_fleet",
    "run_seed",
    "run_experiment",
    "write_report",
    "spec_from_dict",
]

CURVE_HEADER = ["generation", "mean_match_ratio", "mean_best_fitness_deviation"]
PLATEAU_TOLERANCE = 0.01


def default_cases() -> list[Request]:
    return [
        Request(3, (50, 30, 20), 5.0),
        Request(4, (40, 20, 20, 20), 5.0),
        Request(5, (30, 20, 20, 20, 10), 5.0),
    ]


@dataclass(frozen=True)
class ExperimentSpec:
    fleet_size: int = 20
    capacity_choices: tuple[int, ...] = (50, 60, 70, 80, 90, 100)
    fleet_seed: int = 0
    cases: tuple[Request, ...] = field(default_factory=lambda: tuple(default_cases()))
    population_sizes: tuple[int, ...] = (20, 40)
    repetitions: int = 100
    ega: EgaConfig = field(default_factory=EgaConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacity_choices", tuple(self.capacity_choices))
        object.__setattr__(self, "cases", tuple(self.cases))
        object.__setattr__(self, "population_sizes", tuple(self.population_sizes))
        if self.fleet_size < 1:
            raise ValueError("fleet_size must be positive")
        if not self.capacity_choices or not all(1 <= c <= 100 for c in self.capacity_choices):
            raise ValueError("capacity choices must be non-empty and within [1, 100]")
        if not self.cases:
            raise ValueError("at least one request case is required")
        if not self.population_sizes or min(self.population_sizes) < 2:
            raise ValueError("population sizes must be at least 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")

    def to_dict(self) -> dict:
        return {
            "fleet_size": self.fleet_size,
            "capacity_choices": list(self.capacity_choices),
            "fleet_seed": self.fleet_seed,
            "cases": [c.to_dict() for c in self.cases],
            "population_sizes": list(self.population_sizes),
            "repetitions": self.repetitions,
            "ega": self.ega.to_dict(),
        }


def spec_from_dict(data: dict) -> ExperimentSpec:
    """Build a spec from a JSON-style mapping; missing keys keep defaults."""
    kwargs = dict(data)
    if "cases" in kwargs:
        kwargs["cases"] = tuple(
            Request.from_ratios(c["child_ratios"], c.get("tolerance_pct", 5.0)) for c in kwargs["cases"]
        )
    if "ega" in kwargs:
        kwargs["ega"] = EgaConfig(**kwargs["ega"])
    return ExperimentSpec(**kwargs)


def generate_fleet(spec: ExperimentSpec) -> Fleet:
    """Nodes 1..fleet_size with seeded capacities; at least one is 100%."""
    rng = random.Random(spec.fleet_seed)
    caps = [rng.choice(spec.capacity_choices) for _ in range(spec.fleet_size)]
    if 100 not in caps:
        caps[rng.randrange(spec.fleet_size)] = 100
    return derive_classes(Fleet(tuple(Node(i, c) for i, c in enumerate(caps, start=1))))


def run_seed(fleet_seed: int, case_index: int, population_size: int, repetition: int) -> int:
    """64-bit seed for one search run, mixed through numpy's SeedSequence."""
    seq = np.random.SeedSequence([fleet_seed, case_index, population_size, repetition])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CellResult:
    case_index: int
    request: Request
    population_size: int
    exact: ExactResult
    generations_to_optimum: tuple[int | None, ...]
    final_best_deviations: tuple[int, ...]
    curve_match_ratio: tuple[float, ...]
    curve_best_deviation: tuple[float, ...]

    @property
    def success_rate(self) -> float:
        hits = sum(g is not None for g in self.generations_to_optimum)
        return hits / len(self.generations_to_optimum)

    @property
    def median_generations_to_optimum(self) -> float:
        """Median over runs; runs that never reach the optimum count as infinite."""
        return median(math.inf if g is None else g for g in self.generations_to_optimum)

    @property
    def generations_to_plateau(self) -> int | None:
        """First generation where the mean-R curve is within 1% of the optimum's R."""
        target = self.exact.best_report.match_ratio
        for g, value in enumerate(self.curve_match_ratio):
            if abs(value - target) <= PLATEAU_TOLERANCE * target:
                return g
        return None

    def summary(self) -> dict:
        med = self.median_generations_to_optimum
        return {
            "case": self.case_index,
            "request": self.request.to_dict(),
            "population_size": self.population_size,
            "exact": self.exact.to_dict(),
            "repetitions": len(self.generations_to_optimum),
            "success_rate": self.success_rate,
            "median_generations_to_optimum": None if math.isinf(med) else med,
            "generations_to_plateau": self.generations_to_plateau,
            "generations_to_optimum": list(self.generations_to_optimum),
            "final_best_deviation": {
                "min": min(self.final_best_deviations),
                "mean": fmean(self.final_best_deviations),
                "max": max(self.final_best_deviations),
            },
        }


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    fleet: Fleet
    cells: dict[tuple[int, int], CellResult]

    def cell(self, case_index: int, population_size: int) -> CellResult:
        return self.cells[(case_index, population_size)]

    def summary(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "fleet": {str(n.id): n.capacity_pct for n in self.fleet.nodes},
            "cells": [self.cells[k].summary() for k in sorted(self.cells)],
        }


def _search(args) -> tuple[tuple[int, int, int], list[GenerationTrace]]:
    key, fleet, request, config = args
    _, traces = evolve(fleet, request, config)
    return key, traces


def _padded(values: list, length: int) -> list:
    return values + [values[-1]] * (length - len(values))


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    fleet = generate_fleet(spec)
    exact = {
        i: solve_exact(fleet, req, spec.ega.mode) for i, req in enumerate(spec.cases, start=1)
    }

    jobs = []
    for i, req in enumerate(spec.cases, start=1):
        for pop in spec.population_sizes:
            for rep in range(spec.repetitions):
                config = replace(
                    spec.ega,
                    population_size=pop,
                    rng_seed=run_seed(spec.fleet_seed, i, pop, rep),
                )
                jobs.append(((i, pop, rep), fleet, req, config))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_search, jobs, chunksize=8))
    else:
        results = dict(map(_search, jobs))

    length = spec.ega.max_generations + 1
    cells = {}
    for i, req in enumerate(spec.cases, start=1):
        optimum = exact[i].best_report.fitness_deviation
        for pop in spec.population_sizes:
            runs = [results[(i, pop, rep)] for rep in range(spec.repetitions)]
            ratios = [_padded([t.mean_match_ratio for t in tr], length) for tr in runs]
            bests = [_padded([t.best_fitness_deviation for t in tr], length) for tr in runs]
            reached = tuple(
                next((t.generation_index for t in tr if t.best_fitness_deviation == optimum), None)
                for tr in runs
            )
            cells[(i, pop)] = CellResult(
                case_index=i,
                request=req,
                population_size=pop,
                exact=exact[i],
                generations_to_optimum=reached,
                final_best_deviations=tuple(tr[-1].best_fitness_deviation for tr in runs),
                curve_match_ratio=tuple(fmean(col) for col in zip(*ratios)),
                curve_best_deviation=tuple(fmean(col) for col in zip(*bests)),
            )
    return ExperimentReport(spec, fleet, cells)


def write_report(report: ExperimentReport, out_dir: str | Path) -> Path:
    """Write summary.json, fleet.csv and one curve CSV per cell; return the summary path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_fleet(report.fleet, out / "fleet.csv")
    for (case, pop), cell in sorted(report.cells.items()):
        with open(out / f"curve_{case}_{pop}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CURVE_HEADER)
            for g, (r, d) in enumerate(zip(cell.curve_match_ratio, cell.curve_best_deviation)):
                writer.writerow([g, repr(r), repr(d)])
    summary = out / "summary.json"
    summary.write_text(json.dumps(report.summary(), indent=2) + "\n", encoding="utf-8")
    return summary
