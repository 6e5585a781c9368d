"""Figures for an experiment run directory.

Uses the object-oriented matplotlib API (no pyplot global state), so it works
headless and from worker processes.
"""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

from .sim import ExperimentReport

__all__ = ["plot_exact_baseline", "plot_convergence", "render_figures"]

_STYLE = {"linewidth": 1.2}


def plot_exact_baseline(report: ExperimentReport, path: str | Path) -> Path:
    """Exact mean R over all combinations, and the optimum's R, per request size."""
    cases = sorted({k[0] for k in report.cells})
    cells = [report.cell(c, report.spec.population_sizes[0]) for c in cases]
    sizes = [cell.request.n_request for cell in cells]

    fig = Figure(figsize=(4.5, 3.2))
    ax = fig.add_subplot()
    ax.plot(sizes, [c.exact.mean_match_ratio_all for c in cells], "o-", label="mean over all", **_STYLE)
    ax.plot(sizes, [c.exact.best_report.match_ratio for c in cells], "s--", label="optimum", **_STYLE)
    ax.axhline(1.0, color="0.6", linewidth=0.8)
    ax.set_xticks(sizes)
    ax.set_xlabel("requested nodes")
    ax.set_ylabel("match ratio R")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return Path(path)


def plot_convergence(report: ExperimentReport, population_size: int, path: str | Path) -> Path:
    """Mean R of the population against generation, one line per case."""
    fig = Figure(figsize=(4.5, 3.2))
    ax = fig.add_subplot()
    for (case, pop), cell in sorted(report.cells.items()):
        if pop != population_size:
            continue
        (line,) = ax.plot(
            range(len(cell.curve_match_ratio)),
            cell.curve_match_ratio,
            label=f"{cell.request.n_request} nodes",
            **_STYLE,
        )
        ax.axhline(cell.exact.best_report.match_ratio, color=line.get_color(), linestyle=":", linewidth=0.8)
    ax.set_xlabel("generation")
    ax.set_ylabel("mean match ratio R")
    ax.set_title(f"population {population_size}", fontsize=9)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return Path(path)


def render_figures(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [plot_exact_baseline(report, out / "exact_baseline.png")]
    for pop in report.spec.population_sizes:
        paths.append(plot_convergence(report, pop, out / f"convergence_pop{pop}.png"))
    return paths
