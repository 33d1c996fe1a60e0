"""Report figures. Uses the non-interactive Agg backend so it works headless."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import RunReport  # noqa: E402
from .trace import TraceRecord  # noqa: E402

COLORS = {"aarc": "tab:blue", "bo": "tab:orange", "maff": "tab:green"}


def best_so_far(trace: Sequence[TraceRecord]) -> list[float]:
    """Cost of the best accepted sample up to each index (nan before the first)."""
    out, best = [], float("nan")
    for r in trace:
        if r.accepted and not (r.cost >= best):
            best = r.cost
        out.append(best)
    return out


def cumulative_time(trace: Sequence[TraceRecord]) -> list[float]:
    out, total = [], 0.0
    for r in trace:
        total += r.runtime_s
        out.append(total)
    return out


def plot_search_curves(reports: Sequence[RunReport], path: str | Path) -> Path:
    """Best accepted cost and cumulative sampling time against sample index."""
    fig, (ax_cost, ax_time) = plt.subplots(1, 2, figsize=(10, 4))
    labelled = set()
    for rep in reports:
        if not rep.ok or not rep.trace:
            continue
        color = COLORS.get(rep.method)
        label = None if rep.method in labelled else rep.method
        labelled.add(rep.method)
        xs = range(len(rep.trace))
        ax_cost.plot(xs, best_so_far(rep.trace), color=color, alpha=0.6, lw=1, label=label)
        ax_time.plot(xs, cumulative_time(rep.trace), color=color, alpha=0.6, lw=1, label=label)
    ax_cost.set(xlabel="sample", ylabel="best accepted cost", title="search progress")
    ax_time.set(xlabel="sample", ylabel="simulated sampling time (s)", title="search time")
    for ax in (ax_cost, ax_time):
        ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_summary(rows: Sequence[dict], path: str | Path) -> Path:
    """Bars of the per-method medians from :func:`flowtune.harness.summary_table`."""
    keys = [("median_cost", "final cost"), ("median_sampling_time_s", "sampling time (s)"), ("median_allocated_mem_mb", "memory (MB)")]
    fig, axes = plt.subplots(1, len(keys), figsize=(12, 3.5))
    methods = [r["method"] for r in rows]
    for ax, (key, title) in zip(axes, keys):
        vals = [r.get(key, float("nan")) for r in rows]
        ax.bar(methods, vals, color=[COLORS.get(m, "grey") for m in methods])
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
