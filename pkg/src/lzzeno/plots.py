"""SVG rendering of trajectory and sweep CSV files.

Output is byte-identical for identical input: the SVG hash salt and the date
metadata are pinned.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import io  # noqa: E402

KINDS = ("timeseries", "asymptote", "surface")
DEFAULT_SERIES = ("p1_dia", "p2_adi")


class PlotInputError(ValueError):
    pass


def _column(header, data, name, path):
    try:
        return data[:, header.index(name)]
    except ValueError:
        raise PlotInputError(f"{path}: missing column {name!r}") from None


def _require(header, names, path):
    for n in names:
        _column(header, np.empty((0, len(header))), n, path)


def plot_timeseries(ax, header, data, path, columns=DEFAULT_SERIES):
    _require(header, ("t",) + tuple(columns), path)
    t = _column(header, data, "t", path)
    groups = [(None, np.ones(len(t), dtype=bool))]
    if "lambda" in header:
        lam = _column(header, data, "lambda", path)
        groups = [(v, lam == v) for v in np.unique(lam)]
    n = 0
    for lam, mask in groups:
        for col in columns:
            label = col if lam is None else f"{col}, λ̃={lam:g}"
            ax.plot(t[mask], _column(header, data, col, path)[mask], lw=1.0, label=label)
            n += 1
    ax.set_xlabel("t̃")
    ax.set_ylabel("population")
    ax.legend(fontsize=6)
    return {"curves": n}


def _sweep_grid(header, data, path):
    _require(header, ("z", "lambda", "survival"), path)
    z = _column(header, data, "z", path)
    lam = _column(header, data, "lambda", path)
    s = _column(header, data, "survival", path)
    zs, ls = np.unique(z), np.unique(lam)
    grid = np.full((len(ls), len(zs)), np.nan)
    grid[np.searchsorted(ls, lam), np.searchsorted(zs, z)] = s
    return zs, ls, grid


def plot_asymptote(ax, header, data, path):
    zs, ls, grid = _sweep_grid(header, data, path)
    for j, z in enumerate(zs):
        ax.plot(ls, grid[:, j], marker="o", ms=3, lw=1.0, label=f"z̃={z:.3g}")
    positive = ls[ls > 0]
    if positive.size:
        ax.set_xscale("symlog", linthresh=float(positive.min()))
    ax.set_xlabel("λ̃")
    ax.set_ylabel("survival")
    ax.legend(fontsize=6)
    return {"curves": len(zs), "grid_shape": grid.shape}


def plot_surface(ax, header, data, path):
    zs, ls, grid = _sweep_grid(header, data, path)
    # cells on index coordinates so that lambda=0 keeps its own row
    mesh = ax.pcolormesh(np.arange(len(zs) + 1), np.arange(len(ls) + 1), grid,
                         vmin=0.0, vmax=1.0, shading="flat")
    ax.figure.colorbar(mesh, ax=ax, label="survival")
    step_z, step_l = max(1, len(zs) // 6), max(1, len(ls) // 6)
    ax.set_xticks(np.arange(0, len(zs), step_z) + 0.5, [f"{v:.2g}" for v in zs[::step_z]])
    ax.set_yticks(np.arange(0, len(ls), step_l) + 0.5, [f"{v:.2g}" for v in ls[::step_l]])
    ax.set_xlabel("z̃")
    ax.set_ylabel("λ̃")
    return {"grid_shape": grid.shape}


def render(in_path, kind: str, out_path, columns=DEFAULT_SERIES) -> dict:
    """Render ``in_path`` as an SVG at ``out_path``; returns a summary of what was drawn."""
    if kind not in KINDS:
        raise PlotInputError(f"unknown plot kind {kind!r}; choose from {KINDS}")
    header, data = io.read_csv(in_path)
    if data.shape[0] == 0:
        raise PlotInputError(f"{in_path}: no data rows")
    with plt.rc_context({"svg.hashsalt": "lzzeno", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        try:
            if kind == "timeseries":
                info = plot_timeseries(ax, header, data, in_path, columns)
            elif kind == "asymptote":
                info = plot_asymptote(ax, header, data, in_path)
            else:
                info = plot_surface(ax, header, data, in_path)
            out_path = Path(out_path)
            out_path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    info.update({"kind": kind, "rows": int(data.shape[0]), "output": str(out_path)})
    return info
