"""Dispersion relations, inverses, and derived band quantities."""

import numpy as np
import pytest

from bpdg.band import BandModel, build_band
from bpdg.errors import ConfigError


def test_parabolic_energy_and_velocity():
    band = build_band("parabolic", 2.0, 0.0, 4.0)
    p = np.array([0.0, 1.0, 3.0])
    assert np.allclose(band.energy(p), p * p / 4.0)
    assert np.allclose(band.velocity(p), p / 2.0)


def test_kane_energy_solves_dispersion():
    band = build_band("kane", 1.0, 0.5, 4.0)
    # eps(1 + 0.5 eps) = 1/2 at p = 1 has the positive root sqrt(2) - 1
    eps = band.energy(1.0)
    assert np.isclose(eps, np.sqrt(2.0) - 1.0)
    # the defining relation holds across the momentum range
    p = np.linspace(0.0, 4.0, 25)
    eps = band.energy(p)
    assert np.allclose(eps * (1.0 + 0.5 * eps), p * p / 2.0, atol=1e-13)


def test_momentum_of_energy_round_trip():
    band = build_band("kane", 0.8, 0.3, 5.0)
    assert np.isclose(band.momentum_of_energy(1.0), np.sqrt(2.0 * 0.8 * 1.3))
    p = np.linspace(0.0, 5.0, 40)
    assert np.allclose(band.momentum_of_energy(band.energy(p)), p, atol=1e-12)


@pytest.mark.parametrize("kind,alpha", [("parabolic", 0.0), ("kane", 0.7)])
def test_velocity_matches_finite_difference(kind, alpha):
    band = build_band(kind, 1.3, alpha, 6.0)
    p = np.linspace(0.2, 5.5, 30)
    h = 1e-6
    fd = (band.energy(p + h) - band.energy(p - h)) / (2.0 * h)
    assert np.allclose(band.velocity(p), fd, rtol=1e-8)


def test_shell_weight_is_momentum_squared_over_velocity():
    band = build_band("kane", 1.0, 0.4, 5.0)
    eps = np.linspace(0.1, band.eps_max, 20)
    p = band.momentum_of_energy(eps)
    assert np.allclose(band.shell_weight(eps), p * p / band.velocity(p), rtol=1e-12)
    # dp/deps is the reciprocal group velocity away from the band bottom
    assert np.allclose(band.dp_de(eps), 1.0 / band.velocity(p), rtol=1e-12)
    assert band.dp_de(0.0) == np.inf


def test_cutoff_and_density_of_states():
    band = build_band("parabolic", 1.0, 0.0, 2.0)
    assert band.eps_max == 2.0
    assert np.allclose(band.chi(np.array([-0.1, 0.0, 1.0, 2.0, 2.1])),
                       [0.0, 1.0, 1.0, 1.0, 0.0])
    eps = np.array([0.5, 3.0])
    dos = band.density_of_states(eps)
    p = band.momentum_of_energy(0.5)
    assert np.isclose(dos[0], 4.0 * np.pi * p)  # m* = 1: shell weight is m p
    assert dos[1] == 0.0


def test_band_validation():
    with pytest.raises(ConfigError):
        build_band("parabolic", 1.0, 0.5, 1.0)
    with pytest.raises(ConfigError):
        build_band("kane", -1.0, 0.5, 1.0)
    with pytest.raises(ConfigError):
        BandModel(kind="torus")
    with pytest.raises(ValueError):
        build_band("parabolic", 1.0, 0.0, 1.0).energy(-0.5)
