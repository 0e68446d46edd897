"""Matplotlib renderings of the energy and benchmark reports.

Figures are rendered headless (Agg) straight to files, alongside the
delimited output the CLI prints.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .energymodel import ScenarioRow  # noqa: E402


def render_energy_figure(rows: Iterable[ScenarioRow], path: str) -> None:
    """Grouped bars: signing's share of each scenario's energy budget."""
    rows = list(rows)
    scenarios = sorted({r.scenario for r in rows})
    schemes = list(dict.fromkeys(r.scheme for r in rows))
    by = {(r.scheme, r.scenario): r.fraction * 100 for r in rows}

    fig, ax = plt.subplots(figsize=(7.2, 4.0))
    width = 0.8 / max(len(scenarios), 1)
    for k, scenario in enumerate(scenarios):
        xs = [i + k * width for i in range(len(schemes))]
        ys = [by.get((scheme, scenario), 0.0) for scheme in schemes]
        bars = ax.bar(xs, ys, width=width, label=f"{scenario} sensor")
        ax.bar_label(bars, fmt="%.2f", fontsize=7, padding=2)
    ax.set_xticks([i + width * (len(scenarios) - 1) / 2 for i in range(len(schemes))])
    ax.set_xticklabels(schemes)
    ax.set_ylabel("signature generation share of interval energy (%)")
    ax.set_ylim(0, 100)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bench_figure(rows: Sequence, path: str) -> None:
    """Log-scale bars of median operation latencies from a benchmark run."""
    labels = [f"{r.scheme}\n{r.operation}" for r in rows]
    medians = [r.median_us for r in rows]

    fig, ax = plt.subplots(figsize=(7.2, 4.0))
    bars = ax.bar(range(len(rows)), medians, color="tab:blue")
    ax.bar_label(bars, fmt="%.0f", fontsize=7, padding=2)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("median latency (µs)")
    ax.grid(axis="y", alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
