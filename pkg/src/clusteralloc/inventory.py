"""Node fleet model: capacity ratios, class labels and the fleet file format.

A fleet file is UTF-8 text with one ``id,capacity_pct[,class_label]`` record
per line.  ``#`` starts a comment line and blank lines are skipped.  The class
column may be an integer or a roman numeral (``I``, ``II``, ...); when it is
missing the label is derived from the capacities.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, TextIO

__all__ = [
    "Node",
    "Fleet",
    "FleetError",
    "FleetParseError",
    "FleetValidationError",
    "EmptyFleetError",
    "Diagnostic",
    "check_fleet_text",
    "load_fleet",
    "read_fleet",
    "save_fleet",
    "dump_fleet",
    "derive_classes",
    "availability_subset",
]

MIN_CAPACITY = 1
MAX_CAPACITY = 100

_ROMAN = {"I": 1, "V": 5, "X": 10, "L": 50, "C": 100}
_ROMAN_RE = re.compile(r"^[IVXLC]+$")


class FleetError(ValueError):
    """Base class for fleet loading problems."""


class FleetParseError(FleetError):
    """A record is malformed or has a non-integer field."""


class FleetValidationError(FleetError):
    """Records parse but violate a fleet invariant (duplicate id, range)."""


class EmptyFleetError(FleetValidationError):
    """The source holds no node records."""


@dataclass(frozen=True)
class Node:
    id: int
    capacity_pct: int
    class_label: int = 1

    def __post_init__(self) -> None:
        if self.id < 1:
            raise FleetValidationError(f"node id must be positive, got {self.id}")
        if not MIN_CAPACITY <= self.capacity_pct <= MAX_CAPACITY:
            raise FleetValidationError(
                f"node {self.id}: capacity {self.capacity_pct} outside "
                f"[{MIN_CAPACITY}, {MAX_CAPACITY}]"
            )
        if self.class_label < 1:
            raise FleetValidationError(
                f"node {self.id}: class label must be positive, got {self.class_label}"
            )


@dataclass(frozen=True)
class Fleet:
    """Immutable set of available nodes, kept in file order."""

    nodes: tuple[Node, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        seen: set[int] = set()
        for node in self.nodes:
            if node.id in seen:
                raise FleetValidationError(f"duplicate node id {node.id}")
            seen.add(node.id)

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.capacities

    @cached_property
    def capacities(self) -> dict[int, int]:
        """Mapping of node id to capacity percentage."""
        return {n.id: n.capacity_pct for n in self.nodes}

    @property
    def ids(self) -> list[int]:
        return sorted(self.capacities)

    def capacity(self, node_id: int) -> int:
        try:
            return self.capacities[node_id]
        except KeyError:
            raise KeyError(f"unknown node id {node_id}") from None

    def node(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"unknown node id {node_id}")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str
    kind: str  # "parse" or "validation"

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line else "file"
        return f"{where}: {self.message}"


def _parse_int(text: str) -> int:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ValueError(text)
    return int(text)


def _parse_class(text: str) -> int:
    text = text.strip()
    if _ROMAN_RE.match(text.upper()):
        values = [_ROMAN[c] for c in text.upper()]
        total = 0
        for i, v in enumerate(values):
            total += -v if i + 1 < len(values) and v < values[i + 1] else v
        return total
    return _parse_int(text)


def check_fleet_text(text: str) -> tuple[list[Node], list[Diagnostic]]:
    """Parse fleet text, collecting every problem instead of stopping at the first.

    Returns the records that parsed cleanly and a list of diagnostics.  Nodes
    without an explicit class column are labelled from the clean records'
    capacities.
    """
    diagnostics: list[Diagnostic] = []
    records: list[tuple[int, int, int | None, int]] = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            diagnostics.append(
                Diagnostic(lineno, f"expected 2 or 3 fields, got {len(parts)}", "parse")
            )
            continue
        try:
            node_id = _parse_int(parts[0])
            capacity = _parse_int(parts[1])
        except ValueError as exc:
            diagnostics.append(Diagnostic(lineno, f"non-integer field {exc}", "parse"))
            continue
        label = None
        if len(parts) == 3:
            try:
                label = _parse_class(parts[2])
            except ValueError:
                diagnostics.append(
                    Diagnostic(lineno, f"bad class label {parts[2]!r}", "parse")
                )
                continue
        problems = []
        if node_id < 1:
            problems.append(f"node id {node_id} is not positive")
        if not MIN_CAPACITY <= capacity <= MAX_CAPACITY:
            problems.append(
                f"node {node_id}: capacity {capacity} outside [{MIN_CAPACITY}, {MAX_CAPACITY}]"
            )
        if label is not None and label < 1:
            problems.append(f"node {node_id}: class label {label} is not positive")
        if node_id in seen:
            problems.append(f"duplicate node id {node_id} (first on line {seen[node_id]})")
        if problems:
            diagnostics.extend(Diagnostic(lineno, p, "validation") for p in problems)
            continue
        seen[node_id] = lineno
        records.append((node_id, capacity, label, lineno))

    if not records and not diagnostics:
        diagnostics.append(Diagnostic(0, "fleet is empty", "validation"))

    derived = _class_map(c for _, c, _, _ in records)
    nodes = [
        Node(node_id, capacity, label if label is not None else derived[capacity])
        for node_id, capacity, label, _ in records
    ]
    return nodes, diagnostics


def read_fleet(text: str) -> Fleet:
    """Parse fleet text, raising on the first problem found."""
    nodes, diagnostics = check_fleet_text(text)
    for diag in diagnostics:
        if diag.kind == "parse":
            raise FleetParseError(str(diag))
    if diagnostics:
        diag = diagnostics[0]
        if diag.line == 0:
            raise EmptyFleetError(diag.message)
        raise FleetValidationError(str(diag))
    return Fleet(tuple(nodes))


def load_fleet(source: str | Path | TextIO | bytes | io.BufferedIOBase) -> Fleet:
    """Load a fleet from a path, a text/byte stream, or raw bytes."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return read_fleet(text)


def dump_fleet(fleet: Fleet) -> str:
    lines = ["# id,capacity_pct,class_label"]
    for node in sorted(fleet.nodes, key=lambda n: n.id):
        lines.append(f"{node.id},{node.capacity_pct},{node.class_label}")
    return "\n".join(lines) + "\n"


def save_fleet(fleet: Fleet, dest: str | Path | TextIO) -> None:
    """Write the fleet sorted by id, class column always present."""
    text = dump_fleet(fleet)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def _class_map(capacities: Iterable[int]) -> dict[int, int]:
    distinct = sorted(set(capacities), reverse=True)
    return {cap: rank for rank, cap in enumerate(distinct, start=1)}


def derive_classes(fleet: Fleet) -> Fleet:
    """Relabel classes so equal capacities share a label, 1 for the largest.

    Any label already present is overwritten.
    """
    if not len(fleet):
        raise EmptyFleetError("fleet is empty")
    classes = _class_map(n.capacity_pct for n in fleet.nodes)
    return Fleet(tuple(replace(n, class_label=classes[n.capacity_pct]) for n in fleet.nodes))


def availability_subset(fleet: Fleet, excluded_ids: Iterable[int]) -> Fleet:
    """Return the fleet without nodes that are already assigned elsewhere."""
    excluded = set(excluded_ids)
    unknown = excluded - set(fleet.capacities)
    if unknown:
        raise KeyError(f"unknown node ids {sorted(unknown)}")
    return Fleet(tuple(n for n in fleet.nodes if n.id not in excluded))
