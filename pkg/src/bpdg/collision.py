"""Electron-phonon collision operator with analytic energy-shift resolution.

The scattering kernel is a sum of three delta-in-energy channels at
eps' = eps + j*hbar_omega, j in {-1, 0, +1}, with rates c_{+1} = (n_ph+1) K
(emission), c_{-1} = n_ph K (absorption), and an elastic channel c_0.
The delta integrals collapse onto shifted momenta p(eps + j hbar_omega);
a precomputed table stores the owning p-cell, local coordinate, and shell
weight p'^2 dp'/deps' for every quadrature node, so applying the gain is
a gather plus small tensor contractions.  The loss is the pointwise rate
nu(p) = sum_j c_j n(eps - j hbar_omega) with n the density of states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contraction import contract

from .errors import ConfigError
from .field import DGField, DGSpace
from .mesh import legendre_values, physical_nodes

_SHIFT_SIGNS = (-1, 0, 1)


@dataclass(frozen=True)
class ScatteringParams:
    coupling: float = 0.0  # K
    hbar_omega: float = 0.0
    n_ph: float | str = 0.0  # occupancy, or "thermal" for 1/(e^w - 1)
    elastic: float = 0.0  # c_0

    def __post_init__(self):
        problems = []
        if self.coupling < 0:
            problems.append("coupling K must be nonnegative")
        if self.hbar_omega < 0:
            problems.append("hbar_omega must be nonnegative")
        if self.elastic < 0:
            problems.append("elastic constant must be nonnegative")
        if isinstance(self.n_ph, str):
            if self.n_ph != "thermal":
                problems.append(f"n_ph must be a number or 'thermal', got {self.n_ph!r}")
            elif self.hbar_omega <= 0 and self.coupling > 0:
                problems.append("thermal occupancy needs hbar_omega > 0")
        elif self.n_ph < 0:
            problems.append("n_ph must be nonnegative")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def occupancy(self):
        if self.n_ph == "thermal":
            return 1.0 / np.expm1(self.hbar_omega)
        return float(self.n_ph)

    def channel_rate(self, j):
        """c_j: emission for j=+1, absorption for j=-1, elastic for j=0."""
        if j == 1:
            return (self.occupancy + 1.0) * self.coupling
        if j == -1:
            return self.occupancy * self.coupling
        return self.elastic

    @property
    def is_active(self):
        return self.coupling > 0 or self.elastic > 0


def collision_frequency(band, params: ScatteringParams, p):
    """nu(p) = sum_j c_j n(eps(p) - j hbar_omega), zero outside the band."""
    eps = band.energy(p)
    nu = np.zeros_like(np.asarray(eps, dtype=float))
    for j in _SHIFT_SIGNS:
        shifted = eps - j * params.hbar_omega
        inside = (shifted >= 0.0) & (shifted <= band.eps_max)
        nu = nu + params.channel_rate(j) * np.where(
            inside, band.density_of_states(np.where(inside, shifted, 0.0)), 0.0
        )
    return nu


@dataclass
class EnergyShiftTable:
    """Shifted-momentum bookkeeping at all p quadrature nodes.

    Axis 0 runs over the shift signs (-1, 0, +1); entries with chi = 0
    fall outside the band and carry zero weight.
    """

    signs: tuple
    chi: np.ndarray  # (3, n_p, nq) 0/1 band-membership of eps + j w
    owner: np.ndarray  # (3, n_p, nq) p-cell containing the shifted momentum
    eta: np.ndarray  # (3, n_p, nq) local coordinate of p' in the owner cell
    weight: np.ndarray  # (3, n_p, nq) shell weight p'^2 dp'/deps'
    basis: np.ndarray = field(repr=False, default=None)  # (3, n_p, nq, k+1) P_b(eta)


def build_shift_table(space: DGSpace, band, params: ScatteringParams) -> EnergyShiftTable:
    eps = band.energy(space.p_nodes)  # (n_p, nq)
    edges = space.mesh.p_edges
    dp = space.dp
    chi = np.zeros((3,) + eps.shape)
    owner = np.zeros((3,) + eps.shape, dtype=int)
    eta = np.full((3,) + eps.shape, -1.0)
    weight = np.zeros((3,) + eps.shape)
    for idx, j in enumerate(_SHIFT_SIGNS):
        shifted = eps + j * params.hbar_omega
        inside = (shifted >= 0.0) & (shifted <= band.eps_max)
        chi[idx] = inside.astype(float)
        safe = np.where(inside, shifted, 0.0)
        p_shift = band.momentum_of_energy(safe)
        # ties at a cell edge resolve to the lower cell
        cell = np.clip(np.searchsorted(edges, p_shift, side="left") - 1, 0, space.mesh.n_p - 1)
        owner[idx] = np.where(inside, cell, 0)
        loc = 2.0 * (p_shift - edges[owner[idx]]) / dp[owner[idx]] - 1.0
        eta[idx] = np.where(inside, np.clip(loc, -1.0, 1.0), -1.0)
        weight[idx] = np.where(inside, band.shell_weight(safe), 0.0)
    basis = legendre_values(eta.ravel(), space.degree).reshape(eta.shape + (space.n1,))
    return EnergyShiftTable(_SHIFT_SIGNS, chi, owner, eta, weight, basis)


class CollisionOperator:
    def __init__(self, space: DGSpace, band, params: ScatteringParams):
        self.space = space
        self.band = band
        self.params = params
        self.table = build_shift_table(space, band, params)
        # gain channel j reads the table slot with shift +j; the loss at the
        # same slot belongs to channel -j (change of variables in energy)
        self.gain_rates = np.array([params.channel_rate(j) for j in _SHIFT_SIGNS])
        self.loss_rates = np.array([params.channel_rate(-j) for j in _SHIFT_SIGNS])
        self.nu_nodes = 4.0 * np.pi * np.einsum(
            "j,jkr,jkr->kr", self.loss_rates, self.table.chi, self.table.weight
        )
        self.gain_weight = 2.0 * np.pi * np.einsum(
            "j,jkr,jkr->jkr", self.gain_rates, self.table.chi, self.table.weight
        )
        if params.is_active:
            ref = np.concatenate([space.gl.nodes, space.lob.nodes])
            p_union = physical_nodes(space.mesh.p_edges, ref)
            self.nu_max = float(collision_frequency(band, params, p_union).max())
        else:
            self.nu_max = 0.0

    def gain_at_nodes(self, field: DGField):
        """Gain term at (x-node, p-node), mu-independent: (n_x, nq, n_p, nq)."""
        sp = self.space
        # mu-line integrals of f per (x-mode, p-mode): int P_c dmu = dmu * delta_c0
        d0 = np.einsum("ikmab,m->ikab", field.coeffs[:, :, :, :, :, 0], sp.dmu)
        z_owner = self.table.owner.reshape(-1)
        d0_sel = d0[:, z_owner]  # (n_x, Z, n1, n1)
        basis = self.table.basis.reshape(-1, sp.n1)
        g = contract("izab,sa,zb->isz", d0_sel, sp.V, basis)
        g = g.reshape(g.shape[0], g.shape[1], *self.table.owner.shape)
        return contract("isjkr,jkr->iskr", g, self.gain_weight)

    def q_at_nodes(self, field: DGField, node_values=None):
        """Q(f) at every volume quadrature node: (n_x, n_p, n_mu, nq, nq, nq)."""
        sp = self.space
        if node_values is None:
            node_values = sp.node_values(field)
        gain = self.gain_at_nodes(field)  # (i, s, k, r)
        gain_b = gain.transpose(0, 2, 1, 3)[:, :, None, :, :, None]
        loss = self.nu_nodes[None, :, None, None, :, None] * node_values
        return gain_b - loss

    def tested_rhs(self, field: DGField, node_values=None):
        sp = self.space
        qn = self.q_at_nodes(field, node_values)
        u = sp.gl.weights
        return sp.jac[..., None, None, None] * contract(
            "ikmsrq,s,r,q,kr,sa,rb,qc->ikmabc",
            qn, u, u, u, sp.p_sq, sp.V, sp.V, sp.V,
        )

    def rhs(self, field: DGField) -> DGField:
        return DGField(field.degree, self.space.mass_solve(self.tested_rhs(field)))

    def cell_average_rate(self, field: DGField):
        return self.tested_rhs(field)[..., 0, 0, 0] / self.space.mesh.volumes

    def mass_rate(self, field: DGField, node_values=None):
        """integral of Q(f) p^2 over phase space (band-cutoff leakage rate)."""
        sp = self.space
        qn = self.q_at_nodes(field, node_values)
        u = sp.gl.weights
        return float(
            contract(
                "ikmsrq,s,r,q,kr,ikm->",
                qn, u, u, u, sp.p_sq, sp.jac,
            )
        )
