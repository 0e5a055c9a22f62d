"""Figure rendering for run outputs.

Reads the diagnostics CSV and snapshot files a run wrote and renders
summary figures next to them.  Everything draws through the Agg backend
so reports work in headless sessions.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .band import build_band
from .diagnostics import CSV_COLUMNS, read_snapshot
from .field import DGSpace
from .mesh import build_mesh
from .poisson import compute_density

_NUMERIC = [c for c in CSV_COLUMNS if c not in ("binding",)]


def load_diagnostics(path):
    """Diagnostics CSV back as a dict of arrays (binding stays strings)."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = list(reader)
    if not rows:
        raise ValueError(f"no diagnostics rows in {path}")
    out = {}
    for col in CSV_COLUMNS:
        if col == "binding":
            out[col] = np.array([r[col] for r in rows])
        elif col == "limiter_count":
            out[col] = np.array([int(r[col]) for r in rows])
        else:
            out[col] = np.array([float(r[col]) for r in rows])
    return out


def _save(fig, out_dir, name, made):
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    made.append(path)


def render_run_figures(diag, out_dir):
    """Entropy, conservation, current, and stepping figures from a run."""
    os.makedirs(out_dir, exist_ok=True)
    made = []
    t = diag["t"]

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax0.semilogy(t, np.maximum(diag["entropy_norm"], 1e-300), color="tab:blue")
    ax0.set_ylabel("entropy norm")
    ax0.set_title("weighted square norm and interface dissipation")
    ax1.semilogy(t, np.maximum(diag["jump_dissipation"], 1e-300),
                 color="tab:red")
    ax1.set_ylabel("jump dissipation")
    ax1.set_xlabel("t")
    _save(fig, out_dir, "entropy.png", made)

    mass = diag["mass"]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax0.plot(t, mass / mass[0] - 1.0, color="tab:green")
    ax0.set_ylabel("relative mass change")
    ax0.set_title("conservation")
    ax1.plot(t, diag["chi_mass_leak"], color="tab:olive")
    ax1.set_ylabel("cutoff mass leak per step")
    ax1.set_xlabel("t")
    _save(fig, out_dir, "conservation.png", made)

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax0.plot(t, diag["J_min"], label="J_min", color="tab:purple")
    ax0.plot(t, diag["J_max"], label="J_max", color="tab:orange")
    ax0.set_ylabel("current range")
    ax0.legend(loc="best")
    ax0.set_title("current and its spatial spread")
    spread = diag["J_max"] - diag["J_min"]
    ax1.semilogy(t, np.maximum(spread, 1e-300), color="tab:brown")
    ax1.set_ylabel("J_max - J_min")
    ax1.set_xlabel("t")
    _save(fig, out_dir, "current.png", made)

    fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=True)
    axes[0].semilogy(t, diag["dt"], color="tab:blue")
    axes[0].set_ylabel("dt")
    axes[0].set_title("step control")
    axes[1].plot(t, diag["limiter_count"], color="tab:red")
    axes[1].set_ylabel("cells limited")
    axes[2].plot(t, diag["min_control_value"], color="tab:gray")
    axes[2].set_ylabel("min control value")
    axes[2].set_xlabel("t")
    _save(fig, out_dir, "stepping.png", made)
    return made


def render_snapshot_figures(path, out_dir, tag="final"):
    """Density profile and momentum-space occupancy from a snapshot file."""
    os.makedirs(out_dir, exist_ok=True)
    field, meta = read_snapshot(path)
    n_x, n_p, n_mu = (int(v) for v in meta["cells"].split())
    length, p_max = (float(v) for v in meta["domain"].split())
    kind, m_star, alpha_k = meta["band"].split()
    mesh = build_mesh(n_x, n_p, n_mu, length, p_max)
    space = DGSpace(mesh, int(meta["degree"]))
    band = build_band(kind, m_star=float(m_star), alpha_k=float(alpha_k),
                      p_max=p_max)
    made = []

    rho = compute_density(space, field)
    xs = np.linspace(0.0, length, 400)
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(xs, rho.eval_at(xs), color="tab:blue")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(f"density at t = {meta['t']:g}")
    _save(fig, out_dir, f"density_{tag}.png", made)

    avg = space.cell_averages(field)
    occupancy = np.einsum("ikm,m->ik", avg, space.dmu) / 2.0
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    im = ax.imshow(
        occupancy.T,
        origin="lower",
        aspect="auto",
        extent=(0.0, length, 0.0, p_max),
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, label="direction-averaged cell average")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title(f"occupancy at t = {meta['t']:g} ({band.kind} band)")
    _save(fig, out_dir, f"occupancy_{tag}.png", made)
    return made


def render_convergence_figure(rows, out_dir, name="convergence.png"):
    """Log-log refinement curve with a second-order reference slope."""
    os.makedirs(out_dir, exist_ok=True)
    made = []
    n = np.array([r["n_x"] for r in rows], dtype=float)
    err = np.array([r["error"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(n, err, "o-", color="tab:blue", label="measured error")
    ref = err[0] * (n[0] / n) ** 2
    ax.loglog(n, ref, "--", color="tab:gray", label="second order")
    ax.set_xlabel("position cells")
    ax.set_ylabel("error in the weighted norm")
    ax.set_title("field-free wave refinement")
    ax.legend(loc="best")
    _save(fig, out_dir, name, made)
    return made


def render_report(run_dir, out_dir=None):
    """All figures for a completed run directory; returns written paths."""
    out = out_dir if out_dir is not None else run_dir
    made = []
    diag_path = os.path.join(run_dir, "diagnostics.csv")
    if os.path.exists(diag_path):
        made += render_run_figures(load_diagnostics(diag_path), out)
    for tag, name in (("final", "snapshot_final.csv"),
                      ("last_good", "snapshot_last_good.csv")):
        snap = os.path.join(run_dir, name)
        if os.path.exists(snap):
            made += render_snapshot_figures(snap, out, tag=tag)
    if not made:
        raise FileNotFoundError(
            f"no diagnostics.csv or snapshot files under {run_dir}")
    return made
