"""Scattering parameters, the shift table, and the collision operator."""

import numpy as np
import pytest

from bpdg.band import build_band
from bpdg.collision import (
    CollisionOperator,
    ScatteringParams,
    build_shift_table,
    collision_frequency,
)
from bpdg.errors import ConfigError
from bpdg.field import DGSpace
from bpdg.mesh import build_mesh


def test_channel_rates_and_thermal_occupancy():
    params = ScatteringParams(coupling=2.0, hbar_omega=1.0, n_ph="thermal")
    n = 1.0 / np.expm1(1.0)
    assert np.isclose(params.occupancy, n)
    assert np.isclose(params.channel_rate(1), 2.0 * (n + 1.0))
    assert np.isclose(params.channel_rate(-1), 2.0 * n)
    # detailed balance: emission / absorption = e^{hbar_omega}
    assert np.isclose(params.channel_rate(1) / params.channel_rate(-1), np.e)
    assert params.channel_rate(0) == 0.0


def test_scattering_validation():
    with pytest.raises(ConfigError):
        ScatteringParams(coupling=-1.0)
    with pytest.raises(ConfigError):
        ScatteringParams(coupling=1.0, n_ph="thermal", hbar_omega=0.0)
    with pytest.raises(ConfigError):
        ScatteringParams(n_ph="cold")
    assert not ScatteringParams().is_active


def test_collision_frequency_formula():
    band = build_band("parabolic", 1.0, 0.0, 3.0)
    params = ScatteringParams(coupling=0.5, hbar_omega=1.0, n_ph=0.2, elastic=0.7)
    p = 2.0
    eps = p * p / 2.0
    expected = 0.0
    for j, rate in ((1, 0.5 * 1.2), (0, 0.7), (-1, 0.5 * 0.2)):
        shifted = eps - j * 1.0
        if 0.0 <= shifted <= band.eps_max:
            expected += rate * band.density_of_states(shifted)
    assert np.isclose(collision_frequency(band, params, p), expected)


@pytest.fixture(scope="module")
def shift_setup():
    space = DGSpace(build_mesh(2, 12, 4, 1.0, 3.0), 1)
    band = build_band("parabolic", 1.0, 0.0, 3.0)
    params = ScatteringParams(coupling=0.4, hbar_omega=1.0, n_ph=0.3, elastic=0.2)
    return space, band, params


def test_shift_table_geometry(shift_setup):
    space, band, params = shift_setup
    table = build_shift_table(space, band, params)
    eps = band.energy(space.p_nodes)

    up = eps + 1.0  # j = +1 slot
    inside = up <= band.eps_max
    assert np.array_equal(table.chi[2] > 0, inside)
    p_shift = band.momentum_of_energy(np.where(inside, up, 0.0))
    edges = space.mesh.p_edges
    k, r = 5, 1
    assert inside[k, r]
    cell = table.owner[2, k, r]
    assert edges[cell] <= p_shift[k, r] <= edges[cell + 1]
    assert -1.0 <= table.eta[2, k, r] <= 1.0
    # the zero-shift slot maps each node onto itself
    assert np.array_equal(table.owner[1], np.repeat(
        np.arange(space.mesh.n_p)[:, None], space.gl.n, axis=1))
    assert np.allclose(table.eta[1], np.tile(space.gl.nodes, (space.mesh.n_p, 1)),
                       atol=1e-12)


def test_elastic_mass_rate_vanishes(shift_setup):
    space, band, _ = shift_setup
    params = ScatteringParams(elastic=0.9)
    op = CollisionOperator(space, band, params)
    f = space.project(
        lambda x, p, mu: np.exp(-p * p / 2.0) * (1.0 + 0.4 * mu) * (1.0 + 0.2 * x)
    )
    scale = abs(space.mass(f)) * op.nu_max
    assert abs(op.mass_rate(f)) < 1e-14 * scale


def test_elastic_kills_anisotropy_only(shift_setup):
    space, band, _ = shift_setup
    params = ScatteringParams(elastic=0.9)
    op = CollisionOperator(space, band, params)
    iso = space.project(lambda x, p, mu: np.exp(-p * p / 2.0) + 0.0 * mu)
    rate = op.rhs(iso)
    scale = np.abs(iso.coeffs).max() * op.nu_max
    assert np.abs(rate.coeffs).max() < 1e-13 * scale

    aniso = space.project(lambda x, p, mu: np.exp(-p * p / 2.0) * (1.0 + 0.5 * mu))
    assert np.abs(op.rhs(aniso).coeffs).max() > 1e-3 * scale


def test_inelastic_equilibrium_annihilation():
    # fine 1D momentum mesh: the remaining residual is projection error
    space = DGSpace(build_mesh(1, 128, 1, 1.0, 4.0), 2)
    band = build_band("parabolic", 1.0, 0.0, 4.0)
    params = ScatteringParams(coupling=1e-3, hbar_omega=1.0, n_ph="thermal")
    op = CollisionOperator(space, band, params)
    f = space.project(lambda x, p, mu: np.exp(-band.energy(p)))
    q = op.q_at_nodes(f)
    nu = op.nu_nodes[None, :, None, None, :, None]
    f_nodes = space.node_values(f)
    rel = np.abs(q) / (nu * f_nodes)
    assert rel.max() < 1e-5


def test_dissipativity_on_a_random_positive_state(shift_setup):
    space, band, _ = shift_setup
    params = ScatteringParams(elastic=0.8)
    op = CollisionOperator(space, band, params)
    rng = np.random.default_rng(42)

    def positive(x, p, mu):
        return np.exp(-p * p / 2.0) * (1.0 + 0.5 * np.sin(3.0 * x) * mu
                                       + 0.3 * np.cos(2.0 * p))

    f = space.project(positive)
    q = op.q_at_nodes(f)
    f_nodes = space.node_values(f)
    weight = np.exp(band.energy(space.p_nodes))  # e^{eps} at the p nodes
    u = space.gl.weights
    production = np.einsum(
        "ikmsrq,ikmsrq,kr,s,r,q,ikm->",
        q, f_nodes * weight[None, :, None, None, :, None],
        space.p_sq, u, u, u, space.jac,
    )
    scale = op.nu_max * space.l2_p2_norm(f) ** 2
    assert production <= 1e-12 * scale
