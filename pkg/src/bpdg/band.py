"""Energy band models: parabolic and Kane (non-parabolic) dispersion.

Energies are measured in thermal units (k_B T = 1).  The Kane band solves
eps (1 + alpha_k eps) = p^2 / (2 m*), which reduces to the parabolic band
for alpha_k = 0.  A hard cutoff chi restricts the band to [0, eps_max]
with eps_max = eps(p_max).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_KINDS = ("parabolic", "kane")


@dataclass(frozen=True)
class BandModel:
    kind: str
    m_star: float = 1.0
    alpha_k: float = 0.0
    p_max: float = 1.0
    eps_max: float = field(init=False)

    def __post_init__(self):
        problems = []
        if self.kind not in _KINDS:
            problems.append(f"band kind must be one of {_KINDS}, got {self.kind!r}")
        if self.m_star <= 0:
            problems.append(f"m_star must be positive, got {self.m_star!r}")
        if self.alpha_k < 0:
            problems.append(f"alpha_k must be nonnegative, got {self.alpha_k!r}")
        if self.kind == "parabolic" and self.alpha_k != 0.0:
            problems.append("parabolic band requires alpha_k = 0")
        if self.p_max <= 0:
            problems.append(f"p_max must be positive, got {self.p_max!r}")
        if problems:
            raise ConfigError("; ".join(problems))
        object.__setattr__(self, "eps_max", float(self._energy_raw(self.p_max)))

    # dispersion ----------------------------------------------------------

    def _energy_raw(self, p):
        p = np.asarray(p, dtype=float)
        kinetic = p * p / (2.0 * self.m_star)
        if self.alpha_k == 0.0:
            return kinetic
        # conjugate form of (-1 + sqrt(1 + 4 a K)) / (2 a): stable as a -> 0
        return 2.0 * kinetic / (1.0 + np.sqrt(1.0 + 4.0 * self.alpha_k * kinetic))

    def energy(self, p):
        """eps(p) >= 0 for p >= 0."""
        p = np.asarray(p, dtype=float)
        if np.any(p < 0):
            raise ValueError("momentum magnitude must be nonnegative")
        return self._energy_raw(p)

    def velocity(self, p):
        """Group velocity d eps / d p; vanishes at p = 0."""
        p = np.asarray(p, dtype=float)
        if np.any(p < 0):
            raise ValueError("momentum magnitude must be nonnegative")
        eps = self._energy_raw(p)
        return p / (self.m_star * (1.0 + 2.0 * self.alpha_k * eps))

    def momentum_of_energy(self, eps):
        """Inverse dispersion p(eps) = sqrt(2 m* eps (1 + alpha_k eps))."""
        eps = np.asarray(eps, dtype=float)
        if np.any(eps < 0):
            raise ValueError("energy must be nonnegative")
        return np.sqrt(2.0 * self.m_star * eps * (1.0 + self.alpha_k * eps))

    def dp_de(self, eps):
        """dp/deps = 1/v(p(eps)); +inf at the band bottom."""
        eps = np.asarray(eps, dtype=float)
        if np.any(eps < 0):
            raise ValueError("energy must be nonnegative")
        p = self.momentum_of_energy(eps)
        with np.errstate(divide="ignore"):
            return np.where(
                p > 0.0,
                self.m_star * (1.0 + 2.0 * self.alpha_k * eps) / np.where(p > 0, p, 1.0),
                np.inf,
            )

    # cutoff and density of states ---------------------------------------

    def chi(self, eps):
        """Hard band cutoff: 1 on [0, eps_max], else 0."""
        eps = np.asarray(eps, dtype=float)
        return ((eps >= 0.0) & (eps <= self.eps_max)).astype(float)

    def shell_weight(self, eps):
        """p(eps)^2 dp/deps = p(eps) m* (1 + 2 alpha_k eps); finite at eps = 0."""
        eps = np.asarray(eps, dtype=float)
        if np.any(eps < 0):
            raise ValueError("energy must be nonnegative")
        return self.momentum_of_energy(eps) * self.m_star * (1.0 + 2.0 * self.alpha_k * eps)

    def density_of_states(self, eps):
        """n(eps) = 4 pi p^2 dp/deps restricted to the band, zero outside."""
        eps = np.asarray(eps, dtype=float)
        inside = (eps >= 0.0) & (eps <= self.eps_max)
        safe = np.where(inside, eps, 0.0)
        return np.where(inside, 4.0 * np.pi * self.shell_weight(safe), 0.0)


def build_band(kind, m_star, alpha_k, p_max):
    if kind == "parabolic" and alpha_k not in (0, 0.0):
        raise ConfigError("parabolic band requires alpha_k = 0")
    return BandModel(kind=kind, m_star=float(m_star), alpha_k=float(alpha_k), p_max=float(p_max))
