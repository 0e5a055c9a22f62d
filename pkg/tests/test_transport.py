"""Upwind fluxes and the weak-form transport operator."""

import numpy as np
import pytest

from bpdg.band import build_band
from bpdg.errors import ConfigError
from bpdg.field import DGSpace
from bpdg.mesh import build_mesh
from bpdg.poisson import zero_potential
from bpdg.transport import (
    BoundarySpec,
    TransportOperator,
    upwind_flux_mu,
    upwind_flux_p,
    upwind_flux_x,
)


def test_upwind_flux_x_selects_upstream_side():
    assert upwind_flux_x(0.5, 2.0, 3.0, 7.0) == 2.0 * 0.5 * 3.0
    assert upwind_flux_x(-0.5, 2.0, 3.0, 7.0) == 2.0 * -0.5 * 7.0
    assert upwind_flux_x(0.0, 2.0, 3.0, 7.0) == 0.0


def test_upwind_flux_p_and_mu_follow_force_sign():
    # speed -qE mu: negative field and positive mu push upward in p
    assert upwind_flux_p(-1.0, 0.5, 2.0, 9.0) == 0.5 * 2.0
    assert upwind_flux_p(1.0, 0.5, 2.0, 9.0) == -0.5 * 9.0
    assert upwind_flux_mu(-2.0, 4.0, 9.0) == 2.0 * 4.0
    assert upwind_flux_mu(2.0, 4.0, 9.0) == -2.0 * 9.0


def test_boundary_spec_validation():
    with pytest.raises(ConfigError):
        BoundarySpec(kind="reflecting")
    with pytest.raises(ConfigError):
        BoundarySpec(kind="diode-inflow", density_left=-1.0)


@pytest.fixture(scope="module")
def periodic_setup():
    space = DGSpace(build_mesh(6, 8, 6, 1.0, 3.0), 1)
    band = build_band("parabolic", 1.0, 0.0, 3.0)
    op = TransportOperator(space, band, BoundarySpec(kind="periodic"))
    return space, band, op


def test_constant_field_is_steady_without_field(periodic_setup):
    space, band, op = periodic_setup
    f = space.constant_field(1.0)
    rate = op.rhs(f, zero_potential(space.mesh.x_edges))
    assert np.abs(rate.coeffs).max() < 1e-13


def test_x_independent_field_is_steady_without_field(periodic_setup):
    space, band, op = periodic_setup
    f = space.project(lambda x, p, mu: np.exp(-p * p / 2.0) * (1.0 + 0.4 * mu))
    rate = op.rhs(f, zero_potential(space.mesh.x_edges))
    scale = np.abs(f.coeffs).max()
    assert np.abs(rate.coeffs).max() < 1e-12 * scale


def test_periodic_total_mass_rate_vanishes(periodic_setup):
    space, band, op = periodic_setup
    f = space.project(
        lambda x, p, mu: np.exp(-p * p / 2.0)
        * (1.0 + 0.3 * np.sin(2.0 * np.pi * x))
        * (1.0 + 0.5 * mu)
    )
    rate = op.cell_average_rate(f, zero_potential(space.mesh.x_edges))
    total = np.sum(rate * space.mesh.volumes)
    assert abs(total) < 1e-12 * space.mass(f)


def test_x_slab_fluxes_telescope_to_average_rates(periodic_setup):
    space, band, op = periodic_setup
    f = space.project(
        lambda x, p, mu: np.exp(-p * p / 2.0)
        * (1.0 + 0.3 * np.cos(2.0 * np.pi * x))
        * (1.0 + 0.5 * mu)
    )
    rate = op.cell_average_rate(f, zero_potential(space.mesh.x_edges))
    slab_rate = np.sum(rate * space.mesh.volumes, axis=(1, 2))
    fluxes = op.x_slab_fluxes(f)
    # d/dt (slab mass) = inflow - outflow across the two x faces
    assert np.allclose(slab_rate, fluxes[:-1] - fluxes[1:], atol=1e-13)


def test_contact_inflow_fills_an_empty_device():
    space = DGSpace(build_mesh(5, 8, 6, 1.0, 3.0), 1)
    band = build_band("parabolic", 1.0, 0.0, 3.0)
    op = TransportOperator(
        space, band, BoundarySpec(kind="diode-inflow", density_left=1.0, density_right=1.0)
    )
    f = space.zeros()
    rate = op.cell_average_rate(f, zero_potential(space.mesh.x_edges))
    slab_rate = np.sum(rate * space.mesh.volumes, axis=(1, 2))
    assert slab_rate[0] > 0.0 and slab_rate[-1] > 0.0
    assert np.allclose(slab_rate[1:-1], 0.0, atol=1e-15)


def test_rejects_nonpositive_charge(periodic_setup):
    space, band, _ = periodic_setup
    with pytest.raises(ConfigError):
        TransportOperator(space, band, BoundarySpec(kind="periodic"), q=0.0)
