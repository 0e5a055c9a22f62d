"""Analytic 1D electrostatics on piecewise-polynomial charge densities.

-phi'' = (q/eps) (N - rho) is solved in closed form: the source is a
piecewise Legendre series, so two exact antiderivative passes give phi
and E = -phi' without any linear solve.  Dirichlet data enters through
the endpoint values; the periodic variant requires a neutral net charge
and pins the zero-average gauge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contraction import contract
from numpy.polynomial import legendre as npleg

from .errors import CompatibilityError, ConfigError
from .mesh import legendre_values


@dataclass
class PiecewisePoly:
    """Legendre series per x-cell in the local coordinate xi in [-1, 1]."""

    x_edges: np.ndarray
    coeffs: np.ndarray  # (n_cells, degree+1)

    @property
    def n_cells(self):
        return self.coeffs.shape[0]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def dx(self):
        return np.diff(self.x_edges)

    def values_at_ref(self, ref_nodes):
        """Evaluate on every cell at shared reference nodes: (n_cells, n)."""
        table = legendre_values(ref_nodes, self.degree)
        return self.coeffs @ table.T

    def eval_at(self, x):
        """Evaluate at global coordinates (edge hits resolve to the lower cell)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.clip(np.searchsorted(self.x_edges, x, side="left") - 1, 0, self.n_cells - 1)
        lo = self.x_edges[idx]
        xi = 2.0 * (x - lo) / self.dx[idx] - 1.0
        out = np.empty_like(x)
        for j, (i, z) in enumerate(zip(idx, xi)):
            out[j] = npleg.legval(z, self.coeffs[i])
        return out if out.size > 1 else float(out[0])

    def antiderivative(self):
        """Continuous antiderivative vanishing at x = 0 (exact prefix pass)."""
        out = np.zeros((self.n_cells, self.degree + 2))
        running = 0.0
        for i in range(self.n_cells):
            c = npleg.legint(self.coeffs[i], lbnd=-1.0) * (0.5 * self.dx[i])
            c[0] += running
            out[i] = c
            running = npleg.legval(1.0, c)
        return PiecewisePoly(self.x_edges, out)

    def derivative(self):
        """Exact cellwise derivative (discontinuous at edges in general)."""
        deg = max(self.degree, 1)
        out = np.zeros((self.n_cells, deg))
        for i in range(self.n_cells):
            d = npleg.legder(self.coeffs[i]) * (2.0 / self.dx[i])
            out[i, : d.size] = d
        return PiecewisePoly(self.x_edges, out)

    def integral(self):
        """Exact integral over the whole interval."""
        return float(np.sum(self.dx * self.coeffs[:, 0]))

    def mean(self):
        return self.integral() / float(self.x_edges[-1] - self.x_edges[0])

    def __add__(self, other):
        if isinstance(other, PiecewisePoly):
            d = max(self.degree, other.degree) + 1
            c = np.zeros((self.n_cells, d))
            c[:, : self.degree + 1] += self.coeffs
            c[:, : other.degree + 1] += other.coeffs
            return PiecewisePoly(self.x_edges, c)
        c = self.coeffs.copy()
        c[:, 0] += float(other)
        return PiecewisePoly(self.x_edges, c)

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, PiecewisePoly) else -float(other))

    def __mul__(self, scalar):
        return PiecewisePoly(self.x_edges, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def minmax(self, n_samples=8):
        """Range estimate from endpoint and Chebyshev samples per cell."""
        nodes = np.concatenate(([-1.0, 1.0], np.cos(np.pi * np.arange(1, n_samples) / n_samples)))
        vals = self.values_at_ref(np.sort(nodes))
        return float(vals.min()), float(vals.max())


def uniform_doping(x_edges, value):
    n = x_edges.size - 1
    if value < 0:
        raise ConfigError("doping must be nonnegative")
    return PiecewisePoly(x_edges, np.full((n, 1), float(value)))


def stepped_doping(x_edges, n_plus, n_base, junctions):
    """n+ / n / n+ profile; junction positions snap to the nearest cell edge."""
    if n_plus < 0 or n_base < 0:
        raise ConfigError("doping must be nonnegative")
    j_lo, j_hi = sorted(float(j) for j in junctions)
    j_lo = x_edges[np.argmin(np.abs(x_edges - j_lo))]
    j_hi = x_edges[np.argmin(np.abs(x_edges - j_hi))]
    centers = 0.5 * (x_edges[:-1] + x_edges[1:])
    vals = np.where((centers > j_lo) & (centers < j_hi), float(n_base), float(n_plus))
    return PiecewisePoly(x_edges, vals[:, None])


@dataclass
class PotentialSolution:
    """Potential phi and field E = -phi' as exact piecewise polynomials."""

    phi: PiecewisePoly
    e_field: PiecewisePoly
    bc: str

    def e_at_nodes(self, x_ref_nodes):
        return self.e_field.values_at_ref(x_ref_nodes)

    def phi_at_nodes(self, x_ref_nodes):
        return self.phi.values_at_ref(x_ref_nodes)

    def max_abs_e(self):
        lo, hi = self.e_field.minmax()
        return max(abs(lo), abs(hi))


def zero_potential(x_edges):
    z = PiecewisePoly(x_edges, np.zeros((x_edges.size - 1, 1)))
    return PotentialSolution(phi=z, e_field=z, bc="frozen-zero")


def compute_density(space, field):
    """rho(x) = 2 pi int f p^2 dp dmu, exact per-cell polynomial of degree k."""
    mom = contract(
        "ikmab,kb,m->ia",
        field.coeffs[:, :, :, :, :, 0],
        space.p_moment,
        space.dmu,
    )
    return PiecewisePoly(space.mesh.x_edges, 2.0 * np.pi * mom)


def compute_current(space, band, field):
    """J(x) = 2 pi int v(p) mu f p^2 dp dmu; exact in x, quadrature in p."""
    u = space.gl.weights
    v_nodes = band.velocity(space.p_nodes)
    vint = np.einsum("r,kr,rb,kr->kb", u, v_nodes, space.V, space.p_sq) * (
        0.5 * space.dp[:, None]
    )
    mu_centers = 0.5 * (space.mesh.mu_edges[:-1] + space.mesh.mu_edges[1:])
    mu1 = np.zeros((space.mesh.n_mu, space.n1))
    mu1[:, 0] = space.dmu * mu_centers
    mu1[:, 1] = space.dmu**2 / 6.0
    j = contract("ikmabc,kb,mc->ia", field.coeffs, vint, mu1)
    return PiecewisePoly(space.mesh.x_edges, 2.0 * np.pi * j)


def _source(rho, doping, q, eps_perm):
    if eps_perm <= 0:
        raise ConfigError("permittivity must be positive")
    return (doping - rho) * (q / eps_perm)


def solve_dirichlet(rho, doping, q, eps_perm, phi_applied):
    """phi(0) = 0, phi(L) = phi_applied with the exact double antiderivative."""
    source = _source(rho, doping, q, eps_perm)
    s1 = source.antiderivative()
    s2 = s1.antiderivative()
    length = float(rho.x_edges[-1])
    slope = (phi_applied + s2.eval_at(length)) / length
    x_lin = PiecewisePoly(
        rho.x_edges,
        np.column_stack(
            (0.5 * (rho.x_edges[:-1] + rho.x_edges[1:]), 0.5 * np.diff(rho.x_edges))
        ),
    )
    phi = x_lin * slope - s2
    e_field = s1 - slope
    return PotentialSolution(phi=phi, e_field=e_field, bc="dirichlet")


def solve_periodic(rho, doping, q, eps_perm, tol_compat=1e-10):
    """Periodic solve; raises CompatibilityError unless the net charge vanishes."""
    n_total = doping.integral()
    rho_total = rho.integral()
    imbalance = n_total - rho_total
    reference = max(abs(n_total), abs(rho_total), 1e-300)
    if abs(imbalance) > tol_compat * reference:
        raise CompatibilityError(imbalance, reference)
    source = _source(rho, doping, q, eps_perm)
    s1 = source.antiderivative()
    s2 = s1.antiderivative()
    length = float(rho.x_edges[-1])
    slope = s2.eval_at(length) / length
    x_lin = PiecewisePoly(
        rho.x_edges,
        np.column_stack(
            (0.5 * (rho.x_edges[:-1] + rho.x_edges[1:]), 0.5 * np.diff(rho.x_edges))
        ),
    )
    phi_raw = x_lin * slope - s2
    phi = phi_raw - phi_raw.mean()
    e_field = s1 - slope
    return PotentialSolution(phi=phi, e_field=e_field, bc="periodic")
