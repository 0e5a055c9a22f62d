"""Upwind DG transport operator for the reduced kinetic equation.

Advection speeds are H_x = mu * deps/dp, H_p = -q E mu, H_mu = -q E.
Geometric face weights p^2 (p-faces) and 1 - mu^2 (mu-faces) vanish at
p = 0 and mu = +-1, so those boundaries carry no flux.  The outer
momentum boundary uses a zero-inflow ghost; in x the operator supports
periodic wrap or contact-Maxwellian inflow for device runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contraction import contract

from .errors import ConfigError
from .field import DGField, DGSpace


def upwind_flux_x(mu, v, f_minus, f_plus):
    """v * ((mu+|mu|)/2 f- + (mu-|mu|)/2 f+): upwind in the x direction."""
    mu = np.asarray(mu, dtype=float)
    return v * (0.5 * (mu + np.abs(mu)) * f_minus + 0.5 * (mu - np.abs(mu)) * f_plus)


def upwind_flux_p(e_field, mu, f_minus, f_plus, q=1.0):
    """Upwind flux for the momentum direction, speed -q E mu."""
    speed = -q * np.asarray(e_field, dtype=float) * np.asarray(mu, dtype=float)
    return 0.5 * (speed + np.abs(speed)) * f_minus + 0.5 * (speed - np.abs(speed)) * f_plus


def upwind_flux_mu(e_field, f_minus, f_plus, q=1.0):
    """Upwind flux for the angular direction, speed -q E."""
    speed = -q * np.asarray(e_field, dtype=float)
    return 0.5 * (speed + np.abs(speed)) * f_minus + 0.5 * (speed - np.abs(speed)) * f_plus


@dataclass(frozen=True)
class BoundarySpec:
    """x-boundary handling: periodic wrap or Maxwellian contact inflow."""

    kind: str = "periodic"
    density_left: float = 0.0
    density_right: float = 0.0

    def __post_init__(self):
        if self.kind not in ("periodic", "diode-inflow"):
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "diode-inflow" and (self.density_left < 0 or self.density_right < 0):
            raise ConfigError("contact densities must be nonnegative")


class TransportOperator:
    def __init__(self, space: DGSpace, band, boundary: BoundarySpec, q=1.0):
        if q <= 0:
            raise ConfigError("charge magnitude q must be positive")
        self.space = space
        self.band = band
        self.boundary = boundary
        self.q = float(q)

        sp = space
        self.vp = band.velocity(sp.p_nodes)  # (n_p, nq)
        u = sp.gl.weights
        # volume weights with the jacobian factors folded per direction
        self.w_xvol_p = u[None, :] * self.vp * sp.p_sq * (0.5 * sp.dp[:, None])
        self.w_mu_leg = u[None, :] * sp.mu_nodes * (0.5 * sp.dmu[:, None])
        self.w_p_psq = u[None, :] * sp.p_sq
        self.w_mu_geom = u[None, :] * (1.0 - sp.mu_nodes**2)
        self.w_p_lin = u[None, :] * sp.p_nodes * (0.5 * sp.dp[:, None])
        self.mu_up = 0.5 * (sp.mu_nodes + np.abs(sp.mu_nodes))
        self.mu_dn = 0.5 * (sp.mu_nodes - np.abs(sp.mu_nodes))
        # face weights for the (p, mu) cross sections
        self.fw_p = u[None, :] * sp.p_sq * (0.5 * sp.dp[:, None])
        self.fw_mu = u[None, :] * (0.5 * sp.dmu[:, None])
        self.fw_x = u[None, :] * (0.5 * sp.dx[:, None])
        self.p_edge_sq = sp.mesh.p_edges**2
        self.mu_edge_geom = 1.0 - sp.mesh.mu_edges**2

        if boundary.kind == "diode-inflow":
            maxwell = np.exp(-band.energy(sp.p_nodes))
            i_m = float(np.sum(self.fw_p * maxwell))  # int exp(-eps) p^2 dp
            self.ghost_profile = maxwell  # (n_p, nq)
            self.ghost_scale_left = boundary.density_left / (4.0 * np.pi * i_m)
            self.ghost_scale_right = boundary.density_right / (4.0 * np.pi * i_m)

    # assembly ---------------------------------------------------------------

    def tested_rhs(self, field: DGField, potential):
        """Weak-form right-hand side tested against every basis function."""
        sp = self.space
        C = field.coeffs
        V, D, u = sp.V, sp.D, sp.gl.weights
        th, tl = sp.trace_hi, sp.trace_lo
        F = sp.node_values(field)
        e_nodes = potential.e_at_nodes(sp.gl.nodes)  # (n_x, nq)
        minus_qe = -self.q * e_nodes

        # volume terms
        out = contract(
            "ikmsrq,s,kr,mq,sa,rb,qc->ikmabc",
            F, u, self.w_xvol_p, self.w_mu_leg, D, V, V,
        )
        a1 = u[None, :] * minus_qe * (0.5 * sp.dx[:, None])
        out += contract(
            "ikmsrq,is,kr,mq,sa,rb,qc->ikmabc",
            F, a1, self.w_p_psq, self.w_mu_leg, V, D, V,
        )
        out += contract(
            "ikmsrq,is,kr,mq,sa,rb,qc->ikmabc",
            F, a1, self.w_p_lin, self.w_mu_geom, V, V, D,
        )

        # x faces: traces over (p, mu) cross sections
        tr_hi = contract("ikmabc,a,rb,qc->ikmrq", C, th, V, V)
        tr_lo = contract("ikmabc,a,rb,qc->ikmrq", C, tl, V, V)
        if self.boundary.kind == "periodic":
            f_up = np.roll(tr_lo, -1, axis=0)
            flux_above = self.vp[None, :, None, :, None] * (
                self.mu_up[None, None, :, None, :] * tr_hi
                + self.mu_dn[None, None, :, None, :] * f_up
            )
            flux_below = np.roll(flux_above, 1, axis=0)
        else:
            ghost_l = self.ghost_scale_left * self.ghost_profile
            ghost_r = self.ghost_scale_right * self.ghost_profile
            fm = np.concatenate(
                (np.broadcast_to(ghost_l[None, :, None, :, None], tr_hi[:1].shape), tr_hi),
                axis=0,
            )
            fp = np.concatenate(
                (tr_lo, np.broadcast_to(ghost_r[None, :, None, :, None], tr_lo[:1].shape)),
                axis=0,
            )
            flux = self.vp[None, :, None, :, None] * (
                self.mu_up[None, None, :, None, :] * fm
                + self.mu_dn[None, None, :, None, :] * fp
            )
            flux_above, flux_below = flux[1:], flux[:-1]
        upper = contract(
            "ikmrq,kr,mq,rb,qc->ikmbc", flux_above, self.fw_p, self.fw_mu, V, V,
        )
        lower = contract(
            "ikmrq,kr,mq,rb,qc->ikmbc", flux_below, self.fw_p, self.fw_mu, V, V,
        )
        out -= upper[:, :, :, None, :, :] * th[None, None, None, :, None, None]
        out -= -lower[:, :, :, None, :, :] * tl[None, None, None, :, None, None]

        # p faces: traces over (x, mu), speed -q E mu switches per node
        ph = contract("ikmabc,sa,b,qc->ikmsq", C, V, th, V)
        pl = contract("ikmabc,sa,b,qc->ikmsq", C, V, tl, V)
        speed_p = minus_qe[:, None, :, None] * sp.mu_nodes[None, :, None, :]  # (i,m,s,q)
        sp_up = 0.5 * (speed_p + np.abs(speed_p))
        sp_dn = 0.5 * (speed_p - np.abs(speed_p))
        fm_p = ph  # f- at the face above cell k
        fp_p = np.concatenate((pl[:, 1:], np.zeros_like(pl[:, :1])), axis=1)  # zero inflow
        flux_p = (
            sp_up[:, None, :, :, :] * fm_p + sp_dn[:, None, :, :, :] * fp_p
        ) * self.p_edge_sq[None, 1:, None, None, None]
        asm_p = contract(
            "ikmsq,is,mq,sa,qc->ikmac", flux_p, self.fw_x, self.fw_mu, V, V,
        )
        out -= asm_p[:, :, :, :, None, :] * th[None, None, None, None, :, None]
        out[:, 1:] += asm_p[:, :-1, :, :, None, :] * tl[None, None, None, None, :, None]

        # mu faces: traces over (x, p), speed -q E
        mh = contract("ikmabc,sa,rb,c->ikmsr", C, V, V, th)
        ml = contract("ikmabc,sa,rb,c->ikmsr", C, V, V, tl)
        su = 0.5 * (minus_qe + np.abs(minus_qe))  # (i, s)
        sd = 0.5 * (minus_qe - np.abs(minus_qe))
        fm_m = mh[:, :, :-1]
        fp_m = ml[:, :, 1:]
        flux_m = (
            su[:, None, None, :, None] * fm_m + sd[:, None, None, :, None] * fp_m
        ) * self.mu_edge_geom[None, None, 1:-1, None, None]
        asm_m = contract(
            "ikmsr,is,kr,sa,rb->ikmab", flux_m, self.fw_x, self.w_p_lin, V, V,
        )
        out[:, :, :-1] -= asm_m[:, :, :, :, :, None] * th[None, None, None, None, None, :]
        out[:, :, 1:] += asm_m[:, :, :, :, :, None] * tl[None, None, None, None, None, :]

        return out

    def rhs(self, field: DGField, potential) -> DGField:
        """Projected rate of change (mass matrix applied)."""
        return DGField(field.degree, self.space.mass_solve(self.tested_rhs(field, potential)))

    def cell_average_rate(self, field: DGField, potential):
        """Volume-averaged transport increment per unit time."""
        tested = self.tested_rhs(field, potential)
        return tested[..., 0, 0, 0] / self.space.mesh.volumes

    def x_slab_fluxes(self, field: DGField):
        """Total x-face flux of mass through each face (collision-free check)."""
        sp = self.space
        V = sp.V
        tr_hi = np.einsum("ikmabc,a,rb,qc->ikmrq", field.coeffs, sp.trace_hi, V, V)
        tr_lo = np.einsum("ikmabc,a,rb,qc->ikmrq", field.coeffs, sp.trace_lo, V, V)
        if self.boundary.kind == "periodic":
            f_up = np.roll(tr_lo, -1, axis=0)
            flux = self.vp[None, :, None, :, None] * (
                self.mu_up[None, None, :, None, :] * tr_hi
                + self.mu_dn[None, None, :, None, :] * f_up
            )
            totals = np.einsum("ikmrq,kr,mq->i", flux, self.fw_p, self.fw_mu)
            return np.concatenate((totals[-1:], totals))
        ghost_l = self.ghost_scale_left * self.ghost_profile
        ghost_r = self.ghost_scale_right * self.ghost_profile
        fm = np.concatenate(
            (np.broadcast_to(ghost_l[None, :, None, :, None], tr_hi[:1].shape), tr_hi), axis=0
        )
        fp = np.concatenate(
            (tr_lo, np.broadcast_to(ghost_r[None, :, None, :, None], tr_lo[:1].shape)), axis=0
        )
        flux = self.vp[None, :, None, :, None] * (
            self.mu_up[None, None, :, None, :] * fm + self.mu_dn[None, None, :, None, :] * fp
        )
        return np.einsum("ikmrq,kr,mq->i", flux, self.fw_p, self.fw_mu)
