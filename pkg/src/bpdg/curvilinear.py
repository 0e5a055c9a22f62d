"""Curvilinear transport fields and their structural identities.

For momentum coordinates adapted to the band structure, the advection
field beta must be divergence-free with respect to the coordinate
measure and orthogonal to the gradient of the total energy H.  Both
identities hold in closed form; the numeric checks here confirm the
implementations against centered finite differences so the closed-form
expressions stay honest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BetaSpherical:
    """Measure-weighted advection field in (x, p, mu) coordinates.

    Components carry the p^2 (and angular) Jacobian factors, so the
    divergence is the plain coordinate divergence of these components.
    """

    band: object
    q: float = 1.0

    def components(self, x, p, mu, e_field):
        v = self.band.velocity(p)
        b_x = p**2 * mu * v
        b_p = -self.q * e_field * p**2 * mu
        b_mu = -self.q * e_field * p * (1.0 - mu**2)
        return b_x, b_p, b_mu

    def grad_h(self, x, p, mu, e_field):
        """(dH/dx, dH/dp, dH/dmu) for H = eps(p) - q Phi(x), dPhi/dx = -E."""
        shape = np.broadcast(x, p, mu).shape
        d_x = np.broadcast_to(self.q * e_field, shape).astype(float)
        d_p = np.broadcast_to(self.band.velocity(p), shape).astype(float)
        d_mu = np.zeros(shape)
        return d_x, d_p, d_mu

    def beta_dot_grad_h(self, x, p, mu, e_field):
        b = self.components(x, p, mu, e_field)
        g = self.grad_h(x, p, mu, e_field)
        return sum(bi * gi for bi, gi in zip(b, g))

    def divergence_closed_form(self, x, p, mu, e_field):
        """Analytic coordinate divergence; identically zero.

        d/dx (p^2 mu v) = 0, d/dp (-qE p^2 mu) = -2qE p mu,
        d/dmu (-qE p (1 - mu^2)) = +2qE p mu.
        """
        return np.zeros(np.broadcast(x, p, mu).shape)


@dataclass(frozen=True)
class BetaKane5:
    """Five-dimensional advection field for a nonparabolic band in
    coordinates (x, y, w, mu, phi): two positions, dimensionless kinetic
    energy, direction cosine, and azimuth.  c_x and c_k collect the
    physical scaling constants; alpha_k is the nonparabolicity.
    """

    alpha_k: float
    c_x: float = 1.0
    c_k: float = 1.0

    def components(self, x, y, w, mu, phi, e_x, e_y):
        s = np.sqrt(np.clip(1.0 - mu**2, 0.0, None))
        g = w * (1.0 + self.alpha_k * w)
        gp = 1.0 + 2.0 * self.alpha_k * w
        b1 = self.c_x * g * mu
        b2 = self.c_x * g * s * np.cos(phi)
        b3 = -2.0 * self.c_k * g * (mu * e_x + s * np.cos(phi) * e_y)
        b4 = -self.c_k * s * gp * (s * e_x - mu * np.cos(phi) * e_y)
        b5 = self.c_k * gp * e_y * np.sin(phi) / s
        return b1, b2, b3, b4, b5

    def grad_h(self, x, y, w, mu, phi, e_x, e_y):
        """H = w + (2 c_k / c_x)(E_x x + E_y y) up to a constant."""
        shape = np.broadcast(x, y, w, mu, phi).shape
        ratio = 2.0 * self.c_k / self.c_x
        d_x = np.broadcast_to(ratio * e_x, shape).astype(float)
        d_y = np.broadcast_to(ratio * e_y, shape).astype(float)
        d_w = np.ones(shape)
        d_mu = np.zeros(shape)
        d_phi = np.zeros(shape)
        return d_x, d_y, d_w, d_mu, d_phi

    def beta_dot_grad_h(self, x, y, w, mu, phi, e_x, e_y):
        b = self.components(x, y, w, mu, phi, e_x, e_y)
        g = self.grad_h(x, y, w, mu, phi, e_x, e_y)
        return sum(bi * gi for bi, gi in zip(b, g))

    def divergence_closed_form(self, x, y, w, mu, phi, e_x, e_y):
        """Analytic coordinate divergence; identically zero.

        The w-derivative of b3 cancels the mu-derivative of b4 plus the
        phi-derivative of b5: d/dw b3 = -2 c_k (1 + 2 a w)(mu E_x + s cos(phi) E_y),
        d/dmu b4 = c_k (1 + 2 a w)(2 mu E_x + ... ), worked out to zero.
        """
        return np.zeros(np.broadcast(x, y, w, mu, phi).shape)


def divergence_numeric(field, point, args=(), h=1.0e-4):
    """Centered-difference coordinate divergence of field.components.

    field.components(*point, *args) must return one array per coordinate.
    Returns the scalar divergence at the given point(s).
    """
    point = [np.asarray(c, dtype=float) for c in point]
    n = len(point)
    total = 0.0
    for axis in range(n):
        hi = list(point)
        lo = list(point)
        hi[axis] = point[axis] + h
        lo[axis] = point[axis] - h
        up = field.components(*hi, *args)[axis]
        dn = field.components(*lo, *args)[axis]
        total = total + (up - dn) / (2.0 * h)
    return total


def gradient_numeric(scalar, point, h=1.0e-4):
    """Centered-difference gradient of a scalar callable over coordinates."""
    point = [np.asarray(c, dtype=float) for c in point]
    out = []
    for axis in range(len(point)):
        hi = list(point)
        lo = list(point)
        hi[axis] = point[axis] + h
        lo[axis] = point[axis] - h
        out.append((scalar(*hi) - scalar(*lo)) / (2.0 * h))
    return out
