"""The five figure kinds, rendered headless from simulator CSVs.

trajectories      world-frame paths of every UAV (one polyline each)
frame-convergence per-UAV floating-frame position estimates settling to zero
velocities        ground velocity components of every UAV
anees             averaged NEES with the chi-square acceptance bounds
comparison        sweep summary: cohesion and drift aggregates per axis value
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import Table, load_table


def render(kind: str, inputs: list[Path], out: Path, schema: Path | None = None) -> Path:
    """Render one figure kind from the given CSVs and write the image."""
    try:
        renderer = _RENDERERS[kind]
    except KeyError:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {sorted(_RENDERERS)}")
    tables = [load_table(Path(p), schema) for p in inputs]
    fig = renderer(tables)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def _palette(n: int):
    cmap = plt.get_cmap("tab10")
    return [cmap(i % 10) for i in range(n)]


def render_trajectories(tables: list[Table]):
    table = tables[0]
    fig, ax = plt.subplots(figsize=(7, 6))
    for i, color in zip(table.uav_ids(), _palette(len(table.uav_ids()))):
        x, y = table.require(f"u{i}_true_x", f"u{i}_true_y")
        ax.plot(x, y, color=color, lw=1.2, label=f"UAV {i}")
        ax.plot(x[0], y[0], "o", color=color, ms=5)
        ax.plot(x[-1], y[-1], "s", color=color, ms=5)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("World-frame trajectories (circle: start, square: end)")
    ax.axis("equal")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return fig


def render_frame_convergence(tables: list[Table]):
    table = tables[0]
    (t,) = table.require("t")
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for i, color in zip(table.uav_ids(), _palette(len(table.uav_ids()))):
        ex, ey = table.require(f"u{i}_est_x", f"u{i}_est_y")
        axes[0].plot(t, ex, color=color, lw=1.0, label=f"UAV {i}")
        axes[1].plot(t, ey, color=color, lw=1.0)
    axes[0].set_ylabel("estimated x in frame [m]")
    axes[1].set_ylabel("estimated y in frame [m]")
    axes[1].set_xlabel("t [s]")
    axes[0].set_title("Floating-frame position estimates")
    for ax in axes:
        ax.axhline(0.0, color="k", lw=0.6, alpha=0.5)
        ax.grid(alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    return fig


def render_velocities(tables: list[Table]):
    table = tables[0]
    (t,) = table.require("t")
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for i, color in zip(table.uav_ids(), _palette(len(table.uav_ids()))):
        vx, vy = table.require(f"u{i}_true_vx", f"u{i}_true_vy")
        axes[0].plot(t, vx, color=color, lw=1.0, label=f"UAV {i}")
        axes[1].plot(t, vy, color=color, lw=1.0)
    axes[0].set_ylabel("vx [m/s]")
    axes[1].set_ylabel("vy [m/s]")
    axes[1].set_xlabel("t [s]")
    axes[0].set_title("Ground velocities")
    for ax in axes:
        ax.grid(alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    return fig


def render_anees(tables: list[Table]):
    table = tables[0]
    t, pos, vel, r1, r2 = table.require("t", "anees_pos", "anees_vel", "r1", "r2")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(t, pos, lw=1.0, label="position ANEES")
    ax.plot(t, vel, lw=1.0, label="velocity ANEES")
    ax.axhline(float(r1[0]), color="k", ls="--", lw=1.0, label="acceptance bounds")
    ax.axhline(float(r2[0]), color="k", ls="--", lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("ANEES")
    ax.set_title("Filter consistency")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return fig


def render_comparison(tables: list[Table]):
    table = tables[0]
    table.require("axis_value", "mean_dnb_steady", "mean_vdrift_net")
    labels = [row[table.columns.index("axis_value")] for row in table.raw_rows]
    dnb = table.data[:, table.columns.index("mean_dnb_steady")]
    drift = table.data[:, table.columns.index("mean_vdrift_net")]
    x = np.arange(len(labels))
    fig, ax_dnb = plt.subplots(figsize=(7, 4.5))
    ax_drift = ax_dnb.twinx()
    width = 0.35
    bars_dnb = ax_dnb.bar(x - width / 2, dnb, width, color="tab:blue", label="mean neighbor distance")
    bars_drift = ax_drift.bar(x + width / 2, drift, width, color="tab:orange", label="net drift speed")
    ax_dnb.set_xticks(x)
    ax_dnb.set_xticklabels(labels)
    ax_dnb.set_ylabel("mean neighbor distance [m]")
    ax_drift.set_ylabel("net drift speed [m/s]")
    ax_dnb.set_title("Sweep comparison")
    handles = [bars_dnb, bars_drift]
    ax_dnb.legend(handles, [h.get_label() for h in handles], loc="upper left", fontsize=8)
    ax_dnb.grid(alpha=0.3, axis="y")
    return fig


_RENDERERS = {
    "trajectories": render_trajectories,
    "frame-convergence": render_frame_convergence,
    "velocities": render_velocities,
    "anees": render_anees,
    "comparison": render_comparison,
}

KINDS = sorted(_RENDERERS)
