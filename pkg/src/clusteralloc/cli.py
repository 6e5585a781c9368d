"""Command-line entry point: ``allocate``, ``exact``, ``simulate``, ``validate``.

JSON goes to stdout, diagnostics to stderr.  Exit codes:

    0  success
    2  bad usage (argparse)
    3  parse error (fleet file, ratio list, config file)
    4  validation error (fleet invariants, ratios not summing to 100, ...)
    5  infeasible request (more nodes than the fleet holds)
    6  I/O error
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

from .ega import EgaConfig, evolve, read_config, write_traces
from .exact import InfeasibleRequestError, solve_exact
from .fitness import Request, RequestError, ShapeMode
from .inventory import FleetParseError, FleetValidationError, check_fleet_text, load_fleet
from .sim import ExperimentSpec, run_experiment, spec_from_dict, write_report

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_INFEASIBLE = 5
EXIT_IO = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"not a comma-separated list of integers: {text!r}", EXIT_PARSE) from None


def _request(args) -> Request:
    try:
        return Request.from_ratios(_int_list(args.ratios), args.tolerance)
    except RequestError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from None


def _fleet(path):
    try:
        return load_fleet(path)
    except FleetParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    except FleetValidationError as exc:
        raise CliError(f"{path}: {exc}", EXIT_VALIDATION) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def _ega_config(args) -> EgaConfig:
    config = EgaConfig()
    if getattr(args, "config", None):
        try:
            config = read_config(args.config)
        except OSError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        except (ValueError, TypeError) as exc:
            raise CliError(str(exc), EXIT_PARSE) from None
    overrides = {
        "population_size": args.pop,
        "max_generations": args.generations,
        "rng_seed": args.seed,
        "elitism_count": args.elitism,
        "crossover_pairs_per_generation": args.pairs,
        "mutation_probability": args.mutation,
        "stop_on_stagnation": args.stagnation,
        "mode": args.mode,
    }
    try:
        return replace(config, **{k: v for k, v in overrides.items() if v is not None})
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from None


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_allocate(args) -> int:
    fleet = _fleet(args.fleet)
    request = _request(args)
    start = time.perf_counter()
    trace_path = None
    doc: dict = {"request": request.to_dict(), "solver": args.solver}
    try:
        if args.solver == "exact":
            mode = ShapeMode(args.mode or ShapeMode.ABSOLUTE)
            result = solve_exact(fleet, request, mode)
            best, report = result.best, result.best_report
            doc["mode"] = mode.value
        else:
            config = _ega_config(args)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                individual, traces = evolve(fleet, request, config)
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
            best, report = individual.combo, individual.report
            doc["mode"] = config.mode.value
            doc["config"] = config.to_dict()
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                trace_path = out / "trace.csv"
                write_traces(traces, trace_path)
    except InfeasibleRequestError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    doc.update(
        best=list(best.node_ids),
        report=report.to_dict(),
        trace_path=str(trace_path) if trace_path else None,
        wall_time_ms=round((time.perf_counter() - start) * 1000),
    )
    _emit(doc)
    return EXIT_OK


def cmd_exact(args) -> int:
    fleet = _fleet(args.fleet)
    request = _request(args)
    mode = ShapeMode(args.mode or ShapeMode.ABSOLUTE)
    try:
        result = solve_exact(fleet, request, mode)
    except InfeasibleRequestError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    _emit({"request": request.to_dict(), "mode": mode.value, **result.to_dict()})
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.spec:
        try:
            spec = spec_from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except OSError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.spec}: {exc}", EXIT_PARSE) from None
        except (TypeError, ValueError) as exc:
            raise CliError(f"{args.spec}: {exc}", EXIT_VALIDATION) from None
    else:
        spec = ExperimentSpec()
    changes: dict = {}
    if args.seed is not None:
        changes["fleet_seed"] = args.seed
    if args.pop:
        changes["population_sizes"] = tuple(_int_list(args.pop))
    if args.repetitions is not None:
        changes["repetitions"] = args.repetitions
    if args.fleet_size is not None:
        changes["fleet_size"] = args.fleet_size
    if args.capacities:
        changes["capacity_choices"] = tuple(_int_list(args.capacities))
    ega_changes = {"max_generations": args.generations, "mode": args.mode}
    ega_changes = {k: v for k, v in ega_changes.items() if v is not None}
    try:
        if ega_changes:
            changes["ega"] = replace(spec.ega, **ega_changes)
        spec = replace(spec, **changes)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from None

    try:
        report = run_experiment(spec, workers=args.workers)
    except InfeasibleRequestError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    try:
        summary = write_report(report, args.out)
        if args.figures:
            from .plots import render_figures

            for path in render_figures(report, args.out):
                print(f"figure: {path}", file=sys.stderr)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    print(summary)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        text = Path(args.fleet).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(str(exc), EXIT_IO) from None
    nodes, diagnostics = check_fleet_text(text)
    for diag in diagnostics:
        print(f"{args.fleet}: {diag}", file=sys.stderr)
    _emit(
        {
            "fleet": str(args.fleet),
            "nodes": len(nodes),
            "ok": not diagnostics,
            "diagnostics": [
                {"line": d.line, "kind": d.kind, "message": d.message} for d in diagnostics
            ],
        }
    )
    if not diagnostics:
        return EXIT_OK
    return EXIT_PARSE if any(d.kind == "parse" for d in diagnostics) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusteralloc",
        description="Pick the best combination of cluster nodes for a request.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    request = argparse.ArgumentParser(add_help=False)
    request.add_argument("--fleet", required=True, help="fleet file (id,capacity_pct[,class])")
    request.add_argument("--ratios", required=True, help="child-process ratios, e.g. 50,30,20")
    request.add_argument("--tolerance", type=float, default=5.0, help="tolerance T in percent (default 5)")

    mode = argparse.ArgumentParser(add_help=False)
    mode.add_argument("--mode", choices=[m.value for m in ShapeMode], default=None,
                      help="shape deviation mode (default absolute)")

    ga = argparse.ArgumentParser(add_help=False)
    ga.add_argument("--seed", type=int, help="RNG seed")
    ga.add_argument("--pop", type=int, help="population size")
    ga.add_argument("--generations", type=int, help="maximum number of generations")
    ga.add_argument("--elitism", type=int, help="individuals copied unconditionally")
    ga.add_argument("--pairs", type=int, help="crossover pairs per generation")
    ga.add_argument("--mutation", type=float, help="per-individual swap mutation probability")
    ga.add_argument("--stagnation", type=int, help="stop after this many generations without improvement")
    ga.add_argument("--config", help="key = value file with EgaConfig fields")

    p = sub.add_parser("allocate", parents=[request, mode, ga], help="choose nodes for a request")
    p.add_argument("--solver", choices=["ega", "exact"], default="ega")
    p.add_argument("--out", help="directory for the generation trace (ega only)")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("exact", parents=[request, mode], help="exhaustive search with statistics")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", parents=[mode], help="run the convergence experiment")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--spec", help="JSON experiment spec (flags override it)")
    p.add_argument("--seed", type=int, help="fleet seed")
    p.add_argument("--pop", help="population sizes, e.g. 20,40")
    p.add_argument("--repetitions", type=int, help="seeded runs per cell")
    p.add_argument("--generations", type=int, help="maximum generations per run")
    p.add_argument("--fleet-size", type=int, help="number of synthetic nodes")
    p.add_argument("--capacities", help="capacity choices, e.g. 50,60,70,80,90,100")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--figures", action="store_true", help="also render PNG figures into --out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a fleet file")
    p.add_argument("--fleet", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
