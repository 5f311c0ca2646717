"""File-only figure rendering for the report commands.

Everything goes through the Agg backend and straight to PNG files;
nothing here opens a window. Figures are an opt-in side channel, so
the textual reports stay byte-deterministic with or without them.
"""

from __future__ import annotations

import os
from typing import Mapping, Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_flow_figures(
    ts: Sequence[float],
    traces: Mapping[str, Mapping[str, Sequence[complex]]],
    outdir: str,
) -> list:
    """One figure per evolved operator: coefficient curves over t.

    traces maps target -> component -> values aligned with ts.
    """
    plt = _pyplot()
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for target in traces:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for component, values in traces[target].items():
            re = [v.real for v in values]
            ax.plot(ts, re, label=f"{component} (re)")
            if any(abs(v.imag) > 1e-15 for v in values):
                ax.plot(ts, [v.imag for v in values], "--", label=f"{component} (im)")
        ax.set_xlabel("t")
        ax.set_ylabel(f"coefficients of {target}(t)")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        path = os.path.join(outdir, f"flow_{target}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def save_grid_figure(xs: Sequence[float], outdir: str) -> str:
    """Scatter of the operator grid x(s) against s."""
    plt = _pyplot()
    os.makedirs(outdir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(xs)), [complex(v).real for v in xs], "o-")
    ax.set_xlabel("s")
    ax.set_ylabel("x(s)")
    ax.grid(True, alpha=0.3)
    path = os.path.join(outdir, "grid.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_residual_figure(names: Sequence[str], residuals: Sequence[float], outdir: str) -> str:
    """Log-scale bars of the measured residuals, one per check."""
    plt = _pyplot()
    os.makedirs(outdir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = 1e-18
    vals = [max(abs(r), floor) for r in residuals]
    ax.bar(range(len(vals)), vals)
    ax.set_yscale("log")
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("residual")
    fig.tight_layout()
    path = os.path.join(outdir, "residuals.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
