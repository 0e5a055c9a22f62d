"""Modal DG fields on the tensor mesh with the p^2-weighted inner product.

Each cell carries a tensor Legendre basis P_a(xi) P_b(eta) P_c(zeta) of
degree <= k per direction.  The Gram matrix is diagonal in x and mu but
dense in p because of the p^2 weight; it factorizes per p-row, so
projection and mass solves reduce to small batched linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contraction import contract

from .errors import ConfigError
from .mesh import (
    TensorMesh,
    gauss_legendre,
    gauss_lobatto,
    legendre_derivatives,
    legendre_values,
    physical_nodes,
)


@dataclass
class DGField:
    """Modal coefficients, shape (n_x, n_p, n_mu, k+1, k+1, k+1)."""

    degree: int
    coeffs: np.ndarray

    def copy(self):
        return DGField(self.degree, self.coeffs.copy())

    @property
    def n_modes(self):
        return (self.degree + 1) ** 3


class DGSpace:
    """Precomputed quadrature and basis tables for one mesh and degree.

    Volume quadrature uses k+2 Gauss-Legendre nodes per direction, exact
    for every polynomial integrand of the weak form (degree <= 2k+3).
    """

    def __init__(self, mesh: TensorMesh, degree: int):
        if degree < 1 or degree > 2:
            raise ConfigError(f"degree must be 1 or 2, got {degree!r}")
        self.mesh = mesh
        self.degree = degree
        self.n1 = degree + 1
        self.nq = degree + 2

        self.gl = gauss_legendre(self.nq)
        self.lob = gauss_lobatto(self.nq)

        # basis tables at volume nodes: V[s, a] = P_a(xi_s), D[s, a] = P'_a(xi_s)
        self.V = legendre_values(self.gl.nodes, degree)
        self.D = legendre_derivatives(self.gl.nodes, degree)
        self.Vlob = legendre_values(self.lob.nodes, degree)
        # traces: P_a(-1) = (-1)^a, P_a(+1) = 1
        self.trace_lo = legendre_values(np.array([-1.0]), degree)[0]
        self.trace_hi = legendre_values(np.array([1.0]), degree)[0]

        # physical node grids per cell
        self.x_nodes = physical_nodes(mesh.x_edges, self.gl.nodes)
        self.p_nodes = physical_nodes(mesh.p_edges, self.gl.nodes)
        self.mu_nodes = physical_nodes(mesh.mu_edges, self.gl.nodes)
        self.p_sq = self.p_nodes**2

        self.dx = mesh.dx
        self.dp = mesh.dp
        self.dmu = mesh.dmu

        # diagonal Gram factors: (dx/2) * 2/(2a+1), same for mu
        leg_norm = 2.0 / (2.0 * np.arange(self.n1) + 1.0)
        self.gram_x = 0.5 * self.dx[:, None] * leg_norm[None, :]
        self.gram_mu = 0.5 * self.dmu[:, None] * leg_norm[None, :]

        # p-row Gram: Mp[k, b, b'] = (dp_k/2) sum_r u_r P_b P_b' p_r^2 (exact)
        u = self.gl.weights
        self.Mp = np.einsum(
            "r,rb,rd,kr->kbd", u, self.V, self.V, self.p_sq
        ) * (0.5 * self.dp[:, None, None])
        self.Mp_inv = np.linalg.inv(self.Mp)
        # first row gives the p^2 moments of each P_b over the cell
        self.p_moment = self.Mp[:, 0, :]

        self.jac = (
            0.125
            * self.dx[:, None, None]
            * self.dp[None, :, None]
            * self.dmu[None, None, :]
        )

    # construction ---------------------------------------------------------

    def zeros(self):
        m = self.mesh
        return DGField(
            self.degree,
            np.zeros((m.n_x, m.n_p, m.n_mu, self.n1, self.n1, self.n1)),
        )

    def node_grid(self):
        """Broadcastable (x, p, mu) arrays over all volume quadrature nodes."""
        m = self.mesh
        X = self.x_nodes.reshape(m.n_x, 1, 1, self.nq, 1, 1)
        P = self.p_nodes.reshape(1, m.n_p, 1, 1, self.nq, 1)
        MU = self.mu_nodes.reshape(1, 1, m.n_mu, 1, 1, self.nq)
        return X, P, MU

    def project(self, func):
        """L2_{p^2} projection of a vectorized callable f(x, p, mu)."""
        X, P, MU = self.node_grid()
        vals = np.asarray(func(X, P, MU), dtype=float)
        vals = np.broadcast_to(
            vals, (self.mesh.n_x, self.mesh.n_p, self.mesh.n_mu) + (self.nq,) * 3
        )
        return self.project_node_values(vals)

    def project_node_values(self, vals):
        """Projection from values tabulated at the volume quadrature nodes."""
        u = self.gl.weights
        rhs = self.jac[..., None, None, None] * contract(
            "ikmsrq,s,r,q,kr,sa,rb,qc->ikmabc",
            vals, u, u, u, self.p_sq, self.V, self.V, self.V,
        )
        return DGField(self.degree, self.mass_solve(rhs))

    def mass_solve(self, rhs):
        """Apply the inverse Gram matrix to a tested right-hand side."""
        out = rhs / self.gram_x[:, None, None, :, None, None]
        out = out / self.gram_mu[None, None, :, None, None, :]
        return np.einsum("kDb,ikmabc->ikmaDc", self.Mp_inv, out)

    # evaluation ------------------------------------------------------------

    def node_values(self, field: DGField):
        """Field values at all volume nodes, shape (n_x, n_p, n_mu, nq, nq, nq)."""
        return contract(
            "ikmabc,sa,rb,qc->ikmsrq",
            field.coeffs, self.V, self.V, self.V,
        )

    def evaluate(self, field: DGField, i, k, m, xi, eta, zeta):
        """Point values inside cell (i, k, m) at reference coordinates."""
        Va = legendre_values(np.atleast_1d(xi), self.degree)
        Vb = legendre_values(np.atleast_1d(eta), self.degree)
        Vc = legendre_values(np.atleast_1d(zeta), self.degree)
        out = np.einsum("abc,na,nb,nc->n", field.coeffs[i, k, m], Va, Vb, Vc)
        return out[0] if np.isscalar(xi) else out

    def cell_averages(self, field: DGField):
        """p^2-weighted cell averages (f, 1) / V."""
        weighted = np.einsum("ikmb,kb->ikm", field.coeffs[:, :, :, 0, :, 0], self.p_moment)
        weighted = weighted * self.dx[:, None, None] * self.dmu[None, None, :]
        return weighted / self.mesh.volumes

    def constant_field(self, value):
        f = self.zeros()
        f.coeffs[..., 0, 0, 0] = value
        return f

    # norms ------------------------------------------------------------------

    def inner(self, f: DGField, g: DGField):
        """(f, g) = integral of f g p^2 over phase space."""
        return float(
            contract(
                "ikmabc,kbd,ikmadc,ia,mc->",
                f.coeffs, self.Mp, g.coeffs, self.gram_x, self.gram_mu,
            )
        )

    def l2_p2_norm(self, f: DGField):
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def mass(self, f: DGField):
        """integral of f p^2 dp dmu dx (no angular 2 pi factor)."""
        weighted = np.einsum("ikmb,kb->ikm", f.coeffs[:, :, :, 0, :, 0], self.p_moment)
        return float(np.sum(weighted * self.dx[:, None, None] * self.dmu[None, None, :]))

    def l2_p2_error(self, f: DGField, func, n_extra=3):
        """Error against a vectorized exact function, via elevated quadrature."""
        rule = gauss_legendre(self.nq + n_extra)
        Ve = legendre_values(rule.nodes, self.degree)
        m = self.mesh
        xn = physical_nodes(m.x_edges, rule.nodes).reshape(m.n_x, 1, 1, rule.n, 1, 1)
        pn = physical_nodes(m.p_edges, rule.nodes).reshape(1, m.n_p, 1, 1, rule.n, 1)
        mn = physical_nodes(m.mu_edges, rule.nodes).reshape(1, 1, m.n_mu, 1, 1, rule.n)
        fh = contract("ikmabc,sa,rb,qc->ikmsrq", f.coeffs, Ve, Ve, Ve)
        diff = fh - func(xn, pn, mn)
        u = rule.weights
        err2 = contract(
            "ikmsrq,s,r,q,ikmsrq,kr->",
            diff, u, u, u, diff * self.jac[..., None, None, None],
            (pn[0, :, 0, 0, :, 0]) ** 2,
        )
        return float(np.sqrt(max(err2, 0.0)))
