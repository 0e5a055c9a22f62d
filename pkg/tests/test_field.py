"""Modal fields: projection, evaluation, and weighted inner products."""

import numpy as np

from bpdg.field import DGSpace
from bpdg.mesh import build_mesh


def test_project_constant_is_exact(small_space):
    f = small_space.project(lambda x, p, mu: np.full_like(x, 2.5))
    assert np.allclose(f.coeffs[..., 0, 0, 0], 2.5)
    rest = f.coeffs.copy()
    rest[..., 0, 0, 0] = 0.0
    assert np.abs(rest).max() < 1e-13


def test_project_reproduces_trilinear_functions(small_space):
    def func(x, p, mu):
        return (1.0 + 2.0 * x) * p * (0.5 - mu)

    f = small_space.project(func)
    err = small_space.l2_p2_error(f, func)
    assert err < 1e-13

    vals = small_space.node_values(f)
    x, p, mu = small_space.node_grid()
    assert np.allclose(vals, func(x, p, mu), atol=1e-12)


def test_mass_of_unit_field_is_phase_space_volume(small_space):
    f = small_space.constant_field(1.0)
    assert np.isclose(small_space.mass(f), small_space.mesh.volumes.sum())


def test_inner_product_consistency(small_space):
    rng = np.random.default_rng(7)
    f = small_space.zeros()
    g = small_space.zeros()
    f.coeffs[:] = rng.normal(size=f.coeffs.shape)
    g.coeffs[:] = rng.normal(size=g.coeffs.shape)
    assert np.isclose(small_space.inner(f, g), small_space.inner(g, f))
    assert np.isclose(small_space.l2_p2_norm(f) ** 2, small_space.inner(f, f))


def test_cell_averages_of_projection(small_space):
    f = small_space.project(lambda x, p, mu: np.full_like(x, 3.0) + x * 0.0)
    assert np.allclose(small_space.cell_averages(f), 3.0)


def test_evaluate_matches_node_values(small_space):
    rng = np.random.default_rng(3)
    f = small_space.zeros()
    f.coeffs[:] = rng.normal(size=f.coeffs.shape)
    gl = small_space.gl.nodes
    vals = small_space.node_values(f)
    got = small_space.evaluate(f, 1, 2, 3, gl[0], gl[1], gl[0])
    assert np.isclose(got, vals[1, 2, 3, 0, 1, 0])


def test_project_node_values_round_trip(small_space):
    rng = np.random.default_rng(11)
    f = small_space.zeros()
    f.coeffs[:] = rng.normal(size=f.coeffs.shape)
    g = small_space.project_node_values(small_space.node_values(f))
    assert np.allclose(g.coeffs, f.coeffs, atol=1e-12)


def test_projection_error_decreases_with_degree():
    mesh = build_mesh(4, 8, 4, 1.0, 3.0)

    def func(x, p, mu):
        return np.exp(-p * p / 2.0) * (1.0 + 0.3 * np.sin(2.0 * np.pi * x)) \
            * (1.0 + 0.2 * mu)

    errs = []
    for degree in (1, 2):
        space = DGSpace(mesh, degree)
        errs.append(space.l2_p2_error(space.project(func), func))
    assert errs[1] < 0.2 * errs[0]
