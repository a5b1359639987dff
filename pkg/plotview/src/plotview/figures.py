"""The five figure kinds, each a pure function from parsed data to a PNG."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .readers import control_columns

DPI = 150


def _grid_edges(meta):
    r = np.linspace(meta["r_min"], meta["r_max"], meta["m_r"] + 1)
    theta = np.linspace(0.0, 2.0 * np.pi, meta["m_theta"] + 1)
    return r, theta


def _finish(fig, out_path):
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return Path(out_path)


def density_polar(rho, meta, out_path):
    """Heatmap of the density over (theta, r)."""
    r, theta = _grid_edges(meta)
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    mesh = ax.pcolormesh(theta, r, rho, shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("r")
    ax.set_title(f"density at t = {meta['t']:g} (polar)")
    fig.tight_layout()
    return _finish(fig, out_path)


def density_cartesian(rho, meta, out_path):
    """Heatmap of the density over the annulus in (x, y)."""
    r, theta = _grid_edges(meta)
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    mesh = ax.pcolormesh(rr * np.cos(tt), rr * np.sin(tt), rho,
                         shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title(f"density at t = {meta['t']:g} (cartesian)")
    fig.tight_layout()
    return _finish(fig, out_path)


def energy(series, out_path):
    """Boundary thermal energy vs time with a short-time zoom inset.

    Args:
        series: list of (label, diagnostics dict); all are overlaid.
        out_path: image destination.
    """
    fig, ax = plt.subplots(figsize=(7.2, 4.6))
    t_max = max(float(diag["t"][-1]) for _, diag in series if len(diag["t"]))
    zoom_end = min(25.0, t_max) if t_max > 0 else 1.0
    inset = ax.inset_axes([0.08, 0.55, 0.38, 0.4])
    for label, diag in series:
        ax.semilogy(diag["t"], diag["E_b"], label=label)
        mask = diag["t"] <= zoom_end
        inset.semilogy(diag["t"][mask], diag["E_b"][mask])
    ax.set_xlabel("t")
    ax.set_ylabel(r"$E_b$")
    ax.set_title("boundary thermal energy")
    ax.legend(loc="lower right")
    inset.set_title(f"t in [0, {zoom_end:g}]", fontsize=8)
    inset.tick_params(labelsize=7)
    fig.tight_layout()
    return _finish(fig, out_path)


def control_map(diag, out_path):
    """Control values per coarse cell as a (time x cell) color map."""
    cols = control_columns(diag)
    t = diag["t"]
    values = np.vstack([diag[c] for c in cols])
    # cell-edge coordinates so every (step, cell) pair is one tile
    if len(t) > 1:
        dt = t[1] - t[0]
        t_edges = np.concatenate([t - 0.5 * dt, [t[-1] + 0.5 * dt]])
    else:
        t_edges = np.array([-0.5, 0.5])
    k_edges = np.arange(len(cols) + 1) + 0.5
    vmax = float(np.abs(values).max()) or 1.0
    fig, ax = plt.subplots(figsize=(7.2, 3.6))
    mesh = ax.pcolormesh(t_edges, k_edges, values, shading="flat",
                         cmap="coolwarm", vmin=-vmax, vmax=vmax)
    fig.colorbar(mesh, ax=ax, label="B")
    ax.set_xlabel("t")
    ax.set_ylabel("control cell")
    ax.set_yticks(np.arange(1, len(cols) + 1))
    ax.set_title("applied control field per cell")
    fig.tight_layout()
    return _finish(fig, out_path)


def convergence(table, out_path):
    """Log-log error vs step size with a first-order guide line."""
    h, err = table["h"], table["err"]
    fig, ax = plt.subplots(figsize=(5.6, 4.4))
    ax.loglog(h, err, "o-", label="measured")
    guide = err[np.argmin(h)] * (h / h.min())
    ax.loglog(h, guide, "k--", label="slope 1")
    for n_t, hi, ei in zip(table["N_t"], h, err):
        ax.annotate(f"$N_t$={n_t}", (hi, ei), textcoords="offset points",
                    xytext=(4, 4), fontsize=7)
    ax.set_xlabel("h")
    ax.set_ylabel("max state error")
    ax.set_title("time-step self-convergence")
    ax.legend()
    fig.tight_layout()
    return _finish(fig, out_path)
