"""Choose node combinations for heterogeneous public-cluster requests."""

from .ega import EgaConfig, GenerationTrace, Individual, evolve
from .exact import ExactResult, InfeasibleRequestError, enumerate_combinations, solve_exact
from .fitness import Combination, FitnessReport, Request, ShapeMode, evaluate
from .inventory import (
    Fleet,
    Node,
    availability_subset,
    derive_classes,
    load_fleet,
    save_fleet,
)

__all__ = [
    "Combination",
    "EgaConfig",
    "ExactResult",
    "FitnessReport",
    "Fleet",
    "GenerationTrace",
    "Individual",
    "InfeasibleRequestError",
    "Node",
    "Request",
    "ShapeMode",
    "availability_subset",
    "derive_classes",
    "enumerate_combinations",
    "evaluate",
    "evolve",
    "load_fleet",
    "save_fleet",
    "solve_exact",
]

__version__ = "0.1.0"
