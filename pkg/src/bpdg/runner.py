"""Scenario assembly: from a validated config to solver objects and runs.

The initial states are Maxwellian in energy.  Normalizing against the
discrete momentum integral (same quadrature the projection uses) makes
the initial charge balance exact to roundoff, so periodic runs start
compatible with their uniform background.
"""

from __future__ import annotations

import os

import numpy as np

from .band import build_band
from .collision import CollisionOperator, ScatteringParams
from .config import SimulationConfig, config_hash
from .diagnostics import write_records_csv, write_snapshot
from .field import DGSpace
from .mesh import build_mesh
from .poisson import stepped_doping, uniform_doping
from .stepping import KineticSolver
from .transport import BoundarySpec, TransportOperator


def build_space(cfg: SimulationConfig) -> DGSpace:
    mesh = build_mesh(cfg.mesh.N_x, cfg.mesh.N_p, cfg.mesh.N_mu,
                      cfg.mesh.L, cfg.mesh.p_max)
    return DGSpace(mesh, cfg.numerics.degree)


def build_band_model(cfg: SimulationConfig):
    return build_band(cfg.band.kind, m_star=cfg.band.m_star,
                      alpha_k=cfg.band.alpha_k, p_max=cfg.mesh.p_max)


def build_scattering(cfg: SimulationConfig) -> ScatteringParams:
    s = cfg.scattering
    return ScatteringParams(coupling=s.K, hbar_omega=s.hbar_omega,
                            n_ph=s.n_ph, elastic=s.c0)


def build_doping(cfg: SimulationConfig, x_edges):
    po = cfg.poisson
    if po.doping == "uniform":
        return uniform_doping(x_edges, po.N0)
    return stepped_doping(x_edges, po.n_plus, po.n, po.junctions)


def contact_density(cfg: SimulationConfig):
    po = cfg.poisson
    return po.n_plus if po.doping == "nplus-n-nplus" else po.N0


def discrete_maxwell_moment(space: DGSpace, band):
    """int e^{-eps} p^2 dp over [0, p_max] with the projection quadrature."""
    u = space.gl.weights
    vals = np.exp(-band.energy(space.p_nodes)) * space.p_sq
    return float(np.einsum("kr,r,k->", vals, u, 0.5 * space.dp))


def initial_field(cfg: SimulationConfig, space: DGSpace, band):
    """Projected Maxwellian initial state per the [initial] block."""
    ini = cfg.initial
    norm = 4.0 * np.pi * discrete_maxwell_moment(space, band)
    length = cfg.mesh.L
    if ini.kind == "doping-maxwellian":
        doping = build_doping(cfg, space.mesh.x_edges)
        amp_x, amp_mu = ini.x_amplitude, ini.mu_amplitude

        def f0(x, p, mu):
            level = doping.eval_at(x.reshape(-1)).reshape(x.shape)
            shape = (1.0 + amp_x * np.sin(2.0 * np.pi * x / length)) * (
                1.0 + amp_mu * mu
            )
            return level * shape * np.exp(-band.energy(p)) / norm

    else:
        n0 = cfg.poisson.N0
        amp_x, amp_mu = ini.x_amplitude, ini.mu_amplitude

        def f0(x, p, mu):
            shape = (1.0 + amp_x * np.sin(2.0 * np.pi * x / length)) * (
                1.0 + amp_mu * mu
            )
            return n0 * shape * np.exp(-band.energy(p)) / norm

    return space.project(f0)


def build_solver(cfg: SimulationConfig):
    """Assemble (solver, space, band, initial field) from a config."""
    space = build_space(cfg)
    band = build_band_model(cfg)
    params = build_scattering(cfg)
    po = cfg.poisson

    if po.bc == "periodic":
        boundary = BoundarySpec(kind="periodic")
    else:
        density = contact_density(cfg)
        boundary = BoundarySpec(kind="diode-inflow",
                                density_left=density, density_right=density)
    transport = TransportOperator(space, band, boundary, q=po.q)
    collision = (CollisionOperator(space, band, params)
                 if params.is_active else None)
    doping = build_doping(cfg, space.mesh.x_edges)

    solver = KineticSolver(
        space,
        band,
        transport,
        collision,
        doping=doping,
        q=po.q,
        eps_perm=po.epsilon_perm,
        phi_applied=po.Phi0,
        bc=po.bc,
        poisson_refresh=cfg.numerics.poisson_refresh,
        rk=cfg.rk_name(),
        cfl_safety=cfg.numerics.cfl_safety,
        alpha=cfg.numerics.alpha,
        limiter=cfg.numerics.limiter,
    )
    f0 = initial_field(cfg, space, band)
    return solver, space, band, f0


def run_simulation(cfg: SimulationConfig, output_dir=None, on_step=None):
    """Execute the configured run and write CSV + snapshots.

    Returns (RunResult, paths dict).  A step failure still writes the
    diagnostics collected so far plus a snapshot of the last good state.
    """
    solver, space, band, f0 = build_solver(cfg)
    out_dir = output_dir if output_dir is not None else cfg.run.output_dir
    os.makedirs(out_dir, exist_ok=True)
    chash = config_hash(cfg)
    every = int(cfg.run.snapshot_every)
    paths = {"output_dir": out_dir,
             "diagnostics": os.path.join(out_dir, "diagnostics.csv")}

    def hook(index, record, field, potential):
        if every > 0 and (index + 1) % every == 0:
            name = f"snapshot_{index + 1:07d}.csv"
            write_snapshot(os.path.join(out_dir, name), space, band, field,
                           record.t, chash)
            paths.setdefault("snapshots", []).append(os.path.join(out_dir, name))
        if on_step is not None:
            return on_step(index, record, field, potential)
        return False

    result = solver.run(
        f0,
        t_final=cfg.run.t_final,
        max_steps=cfg.run.max_steps,
        on_step=hook,
    )

    write_records_csv(paths["diagnostics"], result.records)
    final_name = ("snapshot_final.csv" if result.status == "ok"
                  else "snapshot_last_good.csv")
    final_path = os.path.join(out_dir, final_name)
    write_snapshot(final_path, space, band, result.field, result.t, chash)
    paths["final_snapshot"] = final_path
    return result, paths
