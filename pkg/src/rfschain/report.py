"""Figure rendering for sweep, scaling, and closed-form outputs.

Every entry point takes already-computed records and writes one PNG
(or whatever the path extension selects) next to the delimited
output. Rendering uses the Agg backend so it works headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .sweep import GLOBAL_ROUTE, ROUTE_ORDER, PeakEstimate, ScalingRow, SweepRecord, record_value


def _finite_series(records, column):
    xs, ys = [], []
    for rec in records:
        val = record_value(rec, column)
        if math.isfinite(val):
            xs.append(rec.param)
            ys.append(val)
    return xs, ys


def sweep_figure(records: list[SweepRecord], routes, path: str,
                 title: str | None = None) -> None:
    """Susceptibilities against the sweep parameter, one line per column."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for route in ROUTE_ORDER:
        if route not in routes:
            continue
        for column, style in ((f"chi12_{route}", "-"), (f"chi23_{route}", "--")):
            xs, ys = _finite_series(records, column)
            if xs:
                ax.plot(xs, ys, style, label=column)
    if GLOBAL_ROUTE in routes:
        xs, ys = _finite_series(records, "chi_global")
        if xs:
            ax.plot(xs, ys, ":", color="black", label="chi_global")
    ax.set_xlabel("parameter")
    ax.set_ylabel("susceptibility")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def scaling_figure(rows: list[ScalingRow], path: str,
                   title: str | None = None) -> None:
    """Peak location and height against system size."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.6))
    sizes = [row.n for row in rows]
    ax1.plot(sizes, [row.param_star for row in rows], "o-")
    ax1.set_xlabel("N")
    ax1.set_ylabel("pseudo-critical parameter")
    ax2.plot(sizes, [row.chi_star for row in rows], "s-")
    ax2.set_xlabel("N")
    ax2.set_ylabel("peak susceptibility")
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def analytic_figure(rows: list[dict], path: str, title: str | None = None) -> None:
    """Closed-form curves: susceptibilities over the parameter grid.

    `rows` are the flat analytic-output dicts (param plus chi columns);
    non-finite entries are skipped per column.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    columns = [key for key in rows[0] if key.startswith("chi")]
    for column in columns:
        xs = [r["param"] for r in rows
              if r.get(column) is not None and math.isfinite(r[column])]
        ys = [r[column] for r in rows
              if r.get(column) is not None and math.isfinite(r[column])]
        if xs:
            ax.plot(xs, ys, label=column)
    ax.set_xlabel("parameter")
    ax.set_ylabel("susceptibility")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
