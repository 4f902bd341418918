"""Figure rendering for sweep reports.

Renders the aggregate rows of a sweep to a PNG next to the delimited
output: median accuracy (or eigenvalue-estimate error) against the swept
axis, one line per graph size.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_sweep_figure(rows: list[dict], path: str) -> str:
    """Plot the aggregates of ``rows`` and save to ``path``; returns the path."""
    aggregates = [row for row in rows if row["kind"] == "aggregate"]
    if not aggregates:
        raise ValueError("no aggregate rows to plot")
    metric = "accuracy"
    if all(row["accuracy"] is None for row in aggregates):
        metric = "eig_error"
    ns = sorted({row["n"] for row in aggregates})
    scales = sorted({row["scale"] for row in aggregates})
    x_axis = "scale" if len(scales) > 1 or len(ns) == 1 else "n"

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for n in ns:
        series = [row for row in aggregates if row["n"] == n]
        series.sort(key=lambda row: row[x_axis])
        xs = [row[x_axis] for row in series]
        ys = [row[metric] if row[metric] is not None else float("nan")
              for row in series]
        ax.plot(xs, ys, marker="o", label=f"n={n}")
    ax.set_xlabel(x_axis)
    ax.set_ylabel(f"median {metric}")
    pipeline = aggregates[0]["pipeline"]
    ax.set_title(f"{pipeline} sweep")
    ax.grid(True, alpha=0.4)
    if len(ns) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
