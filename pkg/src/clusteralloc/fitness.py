"""Fitness of a node combination against a user request.

Two residuals are combined with unit weights:

* capacity deviation, ``|sum of node capacities - 100|``, accepted within
  ``+-T`` percentage points;
* shape deviation, comparing the gaps between neighbouring nodes with the
  gaps between neighbouring child-process ratios.  Both sides are sorted in
  descending order first, so the result does not depend on how the ids are
  listed.  Accepted within ``T/100`` of the child-side gap sum.

The shape term comes in two flavours.  ``absolute`` compares gap by gap,
``telescoping`` compares only the overall spread (max - min), which is what
a plain sum of consecutive differences collapses to.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .inventory import Fleet

__all__ = [
    "ShapeMode",
    "Request",
    "RequestError",
    "Combination",
    "FitnessReport",
    "total_capacity",
    "capacity_deviation",
    "sorted_capacity_profile",
    "profile_gaps",
    "shape_residual",
    "shape_deviation",
    "evaluate",
]

DEFAULT_TOLERANCE = 5.0


class ShapeMode(str, enum.Enum):
    ABSOLUTE = "absolute"
    TELESCOPING = "telescoping"


class RequestError(ValueError):
    """The request violates its own invariants (ratio sum, count, tolerance)."""


@dataclass(frozen=True)
class Request:
    n_request: int
    child_ratios: tuple[int, ...]
    tolerance_pct: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        object.__setattr__(self, "child_ratios", tuple(int(r) for r in self.child_ratios))
        if self.n_request < 2:
            raise RequestError(f"a block needs at least 2 nodes, got {self.n_request}")
        if len(self.child_ratios) != self.n_request:
            raise RequestError(
                f"{len(self.child_ratios)} child ratios given for {self.n_request} nodes"
            )
        if any(r < 1 for r in self.child_ratios):
            raise RequestError("child ratios must be at least 1%")
        if sum(self.child_ratios) != 100:
            raise RequestError(f"child ratios sum to {sum(self.child_ratios)}, not 100")
        if not 0 < self.tolerance_pct <= 100:
            raise RequestError(f"tolerance {self.tolerance_pct} outside (0, 100]")

    @classmethod
    def from_ratios(cls, ratios: Iterable[int], tolerance_pct: float = DEFAULT_TOLERANCE) -> Request:
        ratios = tuple(ratios)
        return cls(len(ratios), ratios, tolerance_pct)

    def to_dict(self) -> dict:
        return {
            "n_request": self.n_request,
            "child_ratios": list(self.child_ratios),
            "tolerance_pct": self.tolerance_pct,
        }


@dataclass(frozen=True, order=True)
class Combination:
    """A set of distinct node ids, always stored in ascending order."""

    node_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        ids = tuple(sorted(self.node_ids))
        if len(set(ids)) != len(ids):
            raise ValueError(f"combination repeats a node: {list(self.node_ids)}")
        object.__setattr__(self, "node_ids", ids)

    @classmethod
    def of(cls, *ids: int) -> Combination:
        return cls(tuple(ids))

    def __len__(self) -> int:
        return len(self.node_ids)

    def __iter__(self):
        return iter(self.node_ids)

    def __str__(self) -> str:
        return "+".join(map(str, self.node_ids))

    @classmethod
    def parse(cls, text: str) -> Combination:
        return cls(tuple(int(t) for t in text.split("+")))


@dataclass(frozen=True)
class FitnessReport:
    total_capacity_pct: int
    capacity_deviation: int
    shape_deviation: int
    fitness_deviation: int
    match_ratio: float
    within_capacity_tolerance: bool
    within_shape_tolerance: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def feasible(self) -> bool:
        return self.within_capacity_tolerance and self.within_shape_tolerance


def total_capacity(combo: Combination, fleet: Fleet) -> int:
    return sum(fleet.capacity(i) for i in combo.node_ids)


def capacity_deviation(combo: Combination, fleet: Fleet, tolerance_pct: float = DEFAULT_TOLERANCE) -> tuple[int, bool]:
    deviation = abs(total_capacity(combo, fleet) - 100)
    return deviation, deviation <= tolerance_pct


def sorted_capacity_profile(combo: Combination, fleet: Fleet) -> list[int]:
    return sorted((fleet.capacity(i) for i in combo.node_ids), reverse=True)


def profile_gaps(profile: Sequence[int]) -> list[int]:
    """Differences between neighbours of a descending profile (all >= 0)."""
    return [profile[k] - profile[k + 1] for k in range(len(profile) - 1)]


def shape_residual(
    node_profile: Sequence[int],
    child_profile: Sequence[int],
    tolerance_pct: float,
    mode: ShapeMode = ShapeMode.ABSOLUTE,
) -> tuple[int, bool]:
    """Shape deviation between two descending profiles of equal length."""
    if len(node_profile) != len(child_profile):
        raise ValueError("profiles differ in length")
    if len(node_profile) < 2:
        return 0, True
    mode = ShapeMode(mode)
    if mode is ShapeMode.ABSOLUTE:
        node_gaps = profile_gaps(node_profile)
        child_gaps = profile_gaps(child_profile)
        deviation = sum(abs(a - b) for a, b in zip(node_gaps, child_gaps))
        scale = sum(child_gaps)
    else:
        child_span = child_profile[0] - child_profile[-1]
        deviation = abs((node_profile[0] - node_profile[-1]) - child_span)
        scale = child_span
    return deviation, deviation <= tolerance_pct / 100 * scale


def shape_deviation(
    combo: Combination,
    fleet: Fleet,
    request: Request,
    mode: ShapeMode = ShapeMode.ABSOLUTE,
) -> tuple[int, bool]:
    if len(combo) != request.n_request:
        raise ValueError(f"combination has {len(combo)} nodes, request wants {request.n_request}")
    return shape_residual(
        sorted_capacity_profile(combo, fleet),
        sorted(request.child_ratios, reverse=True),
        request.tolerance_pct,
        mode,
    )


def evaluate(
    combo: Combination,
    fleet: Fleet,
    request: Request,
    mode: ShapeMode = ShapeMode.ABSOLUTE,
) -> FitnessReport:
    total = total_capacity(combo, fleet)
    cap_dev = abs(total - 100)
    shape_dev, shape_ok = shape_deviation(combo, fleet, request, mode)
    return FitnessReport(
        total_capacity_pct=total,
        capacity_deviation=cap_dev,
        shape_deviation=shape_dev,
        fitness_deviation=cap_dev + shape_dev,
        match_ratio=total / 100,
        within_capacity_tolerance=cap_dev <= request.tolerance_pct,
        within_shape_tolerance=shape_ok,
    )
