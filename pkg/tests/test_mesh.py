"""Quadrature rules and tensor mesh geometry."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpdg.errors import ConfigError
from bpdg.mesh import (
    TensorMesh,
    build_mesh,
    gauss_legendre,
    gauss_lobatto,
    legendre_derivatives,
    legendre_values,
    physical_nodes,
)


@pytest.mark.parametrize("n", range(1, 9))
def test_gauss_legendre_matches_numpy(n):
    rule = gauss_legendre(n)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    assert np.allclose(rule.nodes, nodes, atol=1e-13)
    assert np.allclose(rule.weights, weights, atol=1e-13)


def test_gauss_lobatto_small_rules():
    two = gauss_lobatto(2)
    assert np.allclose(two.nodes, [-1.0, 1.0])
    assert np.allclose(two.weights, [1.0, 1.0])

    three = gauss_lobatto(3)
    assert np.allclose(three.nodes, [-1.0, 0.0, 1.0])
    assert np.allclose(three.weights, [1 / 3, 4 / 3, 1 / 3])

    four = gauss_lobatto(4)
    assert np.allclose(four.nodes, [-1.0, -1 / np.sqrt(5), 1 / np.sqrt(5), 1.0])
    assert np.allclose(four.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6])


@pytest.mark.parametrize(
    "maker,n", [(gauss_legendre, 3), (gauss_legendre, 6), (gauss_lobatto, 4)]
)
def test_quadrature_exactness(maker, n):
    rule = maker(n)
    for deg in range(rule.exactness() + 1):
        approx = np.sum(rule.weights * rule.nodes**deg)
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        assert abs(approx - exact) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=7), st.integers(min_value=0))
def test_gauss_legendre_integrates_random_polynomials(n, seed):
    rule = gauss_legendre(n)
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=rule.exactness() + 1)
    approx = np.sum(rule.weights * np.polyval(coeffs, rule.nodes))
    exact = np.polyint(np.poly1d(coeffs))(1.0) - np.polyint(np.poly1d(coeffs))(-1.0)
    assert abs(approx - exact) < 1e-10 * max(1.0, np.abs(coeffs).sum())


def test_quadrature_rejects_bad_sizes():
    with pytest.raises(ConfigError):
        gauss_legendre(0)
    with pytest.raises(ConfigError):
        gauss_lobatto(1)


def test_build_mesh_geometry():
    mesh = build_mesh(4, 3, 2, 2.0, 3.0)
    assert np.allclose(mesh.x_edges, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert np.allclose(mesh.p_edges, [0.0, 1.0, 2.0, 3.0])
    assert np.allclose(mesh.mu_edges, [-1.0, 0.0, 1.0])
    assert mesh.length == 2.0 and mesh.p_max == 3.0
    assert mesh.n_x == 4 and mesh.n_p == 3 and mesh.n_mu == 2


def test_cell_volume_is_momentum_weighted():
    mesh = build_mesh(1, 3, 1, 1.0, 3.0)
    # p in [1, 2]: integral of p^2 dp = (8 - 1)/3 = 7/3, dx = 1, dmu = 2
    assert np.isclose(mesh.cell_volume(0, 1, 0), 2.0 * 7.0 / 3.0)
    with pytest.raises(IndexError):
        mesh.cell_volume(0, 3, 0)


def test_volumes_sum_to_phase_space_measure():
    mesh = build_mesh(5, 4, 3, 1.5, 2.5)
    expected = 1.5 * (2.5**3 / 3.0) * 2.0
    assert np.isclose(mesh.volumes.sum(), expected)
    assert np.isclose(mesh.box_volumes.sum(), 1.5 * 2.5 * 2.0)


def test_build_mesh_rejects_bad_counts():
    with pytest.raises(ConfigError):
        build_mesh(0, 4, 4, 1.0, 1.0)
    with pytest.raises(ConfigError):
        build_mesh(4, 4, 4, -1.0, 1.0)


def test_physical_nodes_maps_reference_points():
    edges = np.array([0.0, 1.0, 3.0])
    ref = np.array([-1.0, 0.0, 1.0])
    nodes = physical_nodes(edges, ref)
    assert np.allclose(nodes[0], [0.0, 0.5, 1.0])
    assert np.allclose(nodes[1], [1.0, 2.0, 3.0])


def test_legendre_values_and_derivatives():
    x = np.array([-1.0, -0.3, 0.0, 0.8, 1.0])
    vals = legendre_values(x, 2)
    assert np.allclose(vals[:, 0], 1.0)
    assert np.allclose(vals[:, 1], x)
    assert np.allclose(vals[:, 2], 0.5 * (3.0 * x * x - 1.0))
    ders = legendre_derivatives(x, 2)
    assert np.allclose(ders[:, 0], 0.0)
    assert np.allclose(ders[:, 1], 1.0)
    assert np.allclose(ders[:, 2], 3.0 * x)
