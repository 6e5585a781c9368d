"""Exhaustive search over every n-subset of the fleet.

This is the ground truth the genetic search is checked against.  Combinations
are streamed in lexicographic order and scored in fixed-size numpy blocks, so
memory stays flat even for C(45, 5) candidates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .fitness import Combination, FitnessReport, Request, ShapeMode, evaluate
from .inventory import Fleet

__all__ = ["ExactResult", "InfeasibleRequestError", "enumerate_combinations", "solve_exact"]

CHUNK = 1 << 16


class InfeasibleRequestError(ValueError):
    """More nodes requested than the fleet holds (or none at all)."""


@dataclass(frozen=True)
class ExactResult:
    best: Combination
    best_report: FitnessReport
    n_combinations: int
    mean_match_ratio_all: float
    mean_match_ratio_feasible: float | None
    n_feasible: int = 0

    def to_dict(self) -> dict:
        return {
            "best": list(self.best.node_ids),
            "best_report": self.best_report.to_dict(),
            "n_combinations": self.n_combinations,
            "n_feasible": self.n_feasible,
            "mean_match_ratio_all": self.mean_match_ratio_all,
            "mean_match_ratio_feasible": self.mean_match_ratio_feasible,
        }


def _check_size(fleet: Fleet, n: int) -> None:
    if n < 1:
        raise InfeasibleRequestError(f"cannot choose {n} nodes")
    if n > len(fleet):
        raise InfeasibleRequestError(f"{n} nodes requested but only {len(fleet)} available")


def enumerate_combinations(fleet: Fleet, n: int) -> Iterator[Combination]:
    """Yield every n-subset of fleet ids once, lexicographically."""
    _check_size(fleet, n)
    for ids in itertools.combinations(fleet.ids, n):
        yield Combination(ids)


def _index_blocks(size: int, n: int, chunk: int) -> Iterator[np.ndarray]:
    combos = itertools.combinations(range(size), n)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.int64
        )
        if not flat.size:
            return
        yield flat.reshape(-1, n)


def solve_exact(
    fleet: Fleet,
    request: Request,
    mode: ShapeMode = ShapeMode.ABSOLUTE,
    chunk: int = CHUNK,
) -> ExactResult:
    """Score every combination and return the optimum plus mean match ratios.

    Ties on fitness are broken by the lower capacity deviation, then by the
    lexicographically smallest id list.
    """
    n = request.n_request
    _check_size(fleet, n)
    mode = ShapeMode(mode)
    ids = np.array(fleet.ids, dtype=np.int64)
    caps = np.array([fleet.capacity(i) for i in fleet.ids], dtype=np.int64)

    child = sorted(request.child_ratios, reverse=True)
    child_gaps = np.array([child[k] - child[k + 1] for k in range(n - 1)], dtype=np.int64)
    child_span = child[0] - child[-1]
    tol = request.tolerance_pct
    shape_limit = tol / 100 * (int(child_gaps.sum()) if mode is ShapeMode.ABSOLUTE else child_span)

    count = 0
    total_sum = 0
    feasible_count = 0
    feasible_sum = 0
    best_key: tuple[int, int] | None = None
    best_idx: np.ndarray | None = None

    for block in _index_blocks(len(ids), n, chunk):
        c = caps[block]
        total = c.sum(axis=1)
        cap_dev = np.abs(total - 100)
        prof = -np.sort(-c, axis=1)
        if mode is ShapeMode.ABSOLUTE:
            gaps = prof[:, :-1] - prof[:, 1:]
            shape = np.abs(gaps - child_gaps).sum(axis=1)
        else:
            shape = np.abs((prof[:, 0] - prof[:, -1]) - child_span)
        fit = cap_dev + shape
        ok = (cap_dev <= tol) & (shape <= shape_limit)

        count += len(block)
        total_sum += int(total.sum())
        feasible_count += int(ok.sum())
        feasible_sum += int(total[ok].sum())

        f_min = fit.min()
        cands = np.flatnonzero(fit == f_min)
        c_min = cap_dev[cands].min()
        first = cands[np.argmax(cap_dev[cands] == c_min)]
        key = (int(f_min), int(c_min))
        if best_key is None or key < best_key:
            best_key = key
            best_idx = block[first]

    assert best_idx is not None
    best = Combination(tuple(int(i) for i in ids[best_idx]))
    return ExactResult(
        best=best,
        best_report=evaluate(best, fleet, request, mode),
        n_combinations=count,
        mean_match_ratio_all=total_sum / (100 * count),
        mean_match_ratio_feasible=feasible_sum / (100 * feasible_count) if feasible_count else None,
        n_feasible=feasible_count,
    )


def n_combinations(fleet_size: int, n: int) -> int:
    return math.comb(fleet_size, n)
