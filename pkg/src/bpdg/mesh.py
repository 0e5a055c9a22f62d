"""Tensor-product phase-space mesh and Gauss quadrature rules.

The phase space is (x, p, mu) in [0, L] x [0, p_max] x [-1, 1] with the
momentum-weighted measure p^2 dp dmu dx.  Cells are axis-aligned boxes;
quadrature rules live on the reference interval [-1, 1] with weights
summing to 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import ConfigError

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


def _legendre_and_derivative(n, x):
    """Value and derivative of P_n at x via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for m in range(2, n + 1):
        p_prev, p = p, ((2 * m - 1) * x * p - (m - 1) * p_prev) / m
    # (1 - x^2) P_n' = n (P_{n-1} - x P_n); endpoints handled by the caller
    dp = np.where(
        np.abs(x) < 1.0,
        n * (p_prev - x * p) / np.where(np.abs(x) < 1.0, 1.0 - x * x, 1.0),
        0.5 * n * (n + 1) * np.sign(x) ** (n + 1),
    )
    return p, dp


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1]; weights sum to 2."""

    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.kind not in ("gauss-legendre", "gauss-lobatto"):
            raise ConfigError(f"unknown quadrature kind {self.kind!r}")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must increase strictly")
        if abs(self.weights.sum() - 2.0) > 1e-13:
            raise ValueError("quadrature weights must sum to 2")

    @property
    def n(self):
        return self.nodes.size

    def exactness(self):
        """Largest polynomial degree integrated exactly."""
        if self.kind == "gauss-legendre":
            return 2 * self.n - 1
        return 2 * self.n - 3


def gauss_legendre(n):
    """n-point Gauss-Legendre rule by Newton iteration on P_n."""
    if n < 1:
        raise ConfigError("gauss-legendre needs n >= 1")
    if n == 1:
        return QuadratureRule("gauss-legendre", np.zeros(1), np.full(1, 2.0))
    i = np.arange(n)
    x = np.cos(np.pi * (4 * i + 3) / (4 * n + 2))
    for _ in range(_NEWTON_MAXIT):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return QuadratureRule("gauss-legendre", x[order], w[order])


def gauss_lobatto(n):
    """n-point Gauss-Lobatto rule: endpoints plus the roots of P'_{n-1}."""
    if n < 2:
        raise ConfigError("gauss-lobatto needs n >= 2")
    m = n - 1
    if n == 2:
        x = np.array([-1.0, 1.0])
    else:
        # interior nodes: roots of P'_m, seeded with Chebyshev-Lobatto points
        x_int = np.cos(np.pi * np.arange(1, m) / m)
        for _ in range(_NEWTON_MAXIT):
            p, dp = _legendre_and_derivative(m, x_int)
            # P''_m from the Legendre ODE
            d2p = (2 * x_int * dp - m * (m + 1) * p) / (1.0 - x_int * x_int)
            dx = dp / d2p
            x_int = x_int - dx
            if np.max(np.abs(dx)) < _NEWTON_TOL:
                break
        x = np.concatenate(([-1.0], np.sort(x_int), [1.0]))
    pm, _ = _legendre_and_derivative(m, x)
    w = 2.0 / (n * m * pm * pm)
    return QuadratureRule("gauss-lobatto", x, w)


@dataclass(frozen=True)
class TensorMesh:
    """Axis-aligned tensor mesh over [0, L] x [0, p_max] x [-1, 1]."""

    x_edges: np.ndarray
    p_edges: np.ndarray
    mu_edges: np.ndarray

    def __post_init__(self):
        for name, edges in (("x", self.x_edges), ("p", self.p_edges), ("mu", self.mu_edges)):
            if edges.size < 2:
                raise ConfigError(f"{name}_edges needs at least one cell")
            if np.any(np.diff(edges) <= 0):
                raise ConfigError(f"{name}_edges must increase strictly")
        if abs(self.x_edges[0]) > 0 or abs(self.p_edges[0]) > 0:
            raise ConfigError("x and p must start at 0")
        if abs(self.mu_edges[0] + 1.0) > 1e-14 or abs(self.mu_edges[-1] - 1.0) > 1e-14:
            raise ConfigError("mu_edges must span [-1, 1]")

    @property
    def n_x(self):
        return self.x_edges.size - 1

    @property
    def n_p(self):
        return self.p_edges.size - 1

    @property
    def n_mu(self):
        return self.mu_edges.size - 1

    @property
    def length(self):
        return float(self.x_edges[-1])

    @property
    def p_max(self):
        return float(self.p_edges[-1])

    @property
    def dx(self):
        return np.diff(self.x_edges)

    @property
    def dp(self):
        return np.diff(self.p_edges)

    @property
    def dmu(self):
        return np.diff(self.mu_edges)

    def cell_volume(self, i, k, m):
        """p^2-weighted volume dx * (p_+^3 - p_-^3)/3 * dmu of cell (i, k, m)."""
        if not (0 <= i < self.n_x and 0 <= k < self.n_p and 0 <= m < self.n_mu):
            raise IndexError(f"cell index ({i}, {k}, {m}) out of range")
        return float(self.dx[i] * self.p_cubed_diff[k] / 3.0 * self.dmu[m])

    @property
    def p_cubed_diff(self):
        return self.p_edges[1:] ** 3 - self.p_edges[:-1] ** 3

    @property
    def volumes(self):
        """All weighted cell volumes, shape (n_x, n_p, n_mu)."""
        return (
            self.dx[:, None, None]
            * (self.p_cubed_diff / 3.0)[None, :, None]
            * self.dmu[None, None, :]
        )

    @property
    def box_volumes(self):
        """Unweighted cell volumes dx * dp * dmu."""
        return self.dx[:, None, None] * self.dp[None, :, None] * self.dmu[None, None, :]


def build_mesh(n_x, n_p, n_mu, length, p_max):
    """Uniform mesh; counts must be positive and extents positive."""
    problems = []
    for name, n in (("n_x", n_x), ("n_p", n_p), ("n_mu", n_mu)):
        if int(n) != n or n < 1:
            problems.append(f"{name} must be a positive integer, got {n!r}")
    if length <= 0:
        problems.append(f"length must be positive, got {length!r}")
    if p_max <= 0:
        problems.append(f"p_max must be positive, got {p_max!r}")
    if problems:
        raise ConfigError("; ".join(problems))
    return TensorMesh(
        x_edges=np.linspace(0.0, length, int(n_x) + 1),
        p_edges=np.linspace(0.0, p_max, int(n_p) + 1),
        mu_edges=np.linspace(-1.0, 1.0, int(n_mu) + 1),
    )


def physical_nodes(edges, ref_nodes):
    """Map reference nodes in [-1,1] to every cell: shape (n_cells, n_nodes)."""
    lo = edges[:-1, None]
    hi = edges[1:, None]
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * ref_nodes[None, :]


def legendre_values(nodes, degree):
    """Vandermonde of Legendre polynomials P_0..P_degree at the given nodes."""
    return npleg.legvander(np.asarray(nodes, dtype=float), degree)


def legendre_derivatives(nodes, degree):
    """Derivative table P'_a(nodes), same layout as legendre_values."""
    nodes = np.asarray(nodes, dtype=float)
    out = np.zeros((nodes.size, degree + 1))
    for a in range(degree + 1):
        c = np.zeros(a + 1)
        c[a] = 1.0
        out[:, a] = npleg.legval(nodes, npleg.legder(c)) if a > 0 else 0.0
    return out
