"""Numeric verification batteries for the solver's structural guarantees.

Each battery exercises one certified property (advection-field identities,
field-solve residuals, limiter behavior, step-size certificates, collision
dissipativity, entropy decay, mass conservation, convergence order) and
returns CheckResult rows.  The command line front end and the acceptance
tests both run these, so the bounds here are the product's contract.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contraction import contract

from .band import build_band
from .collision import CollisionOperator, ScatteringParams
from .config import parse_config_text, preset_text
from .curvilinear import BetaKane5, BetaSpherical, divergence_numeric
from .diagnostics import Diagnostics
from .errors import CompatibilityError, StepFailure
from .field import DGField, DGSpace
from .mesh import build_mesh
from .poisson import (
    PiecewisePoly,
    compute_density,
    solve_dirichlet,
    solve_periodic,
    uniform_doping,
    zero_potential,
)
from .positivity import (
    ControlPointSet,
    collision_cfl,
    collision_cfl_split,
    equalized_simplex,
    limit_nonnegative,
    optimal_alpha,
    transport_cfl,
    transport_kernels,
)
from .runner import build_solver
from .transport import BoundarySpec, TransportOperator


@dataclass(frozen=True)
class CheckResult:
    """One verified property: observed value against its allowed bound."""

    name: str
    passed: bool
    value: float
    bound: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return (f"[{tag}] {self.name}: value = {self.value:.6e}, "
                f"bound = {self.bound:.6e}{extra}")


def all_passed(results):
    return all(r.passed for r in results)


# advection-field identities ---------------------------------------------------


def _field_identity_checks(name, field, point, args, h=1.0e-4):
    comps = np.stack(field.components(*point, *args))
    scale_b = float(np.abs(comps).max())
    div = np.abs(divergence_numeric(field, point, args=args, h=h))
    worst_div = float(div.max())
    bound_div = 1.0e-6 * scale_b

    grads = np.stack(field.grad_h(*point, *args))
    scale_o = float(np.abs(comps * grads).sum(axis=0).max())
    dots = np.abs(field.beta_dot_grad_h(*point, *args))
    worst_dot = float(dots.max())
    bound_dot = 1.0e-12 * scale_o

    closed = float(np.abs(field.divergence_closed_form(*point, *args)).max())
    n = int(np.asarray(point[0]).size)
    return [
        CheckResult(f"{name}: numeric divergence", worst_div <= bound_div,
                    worst_div, bound_div, f"{n} sample points, h = {h:g}"),
        CheckResult(f"{name}: orthogonality to the energy gradient",
                    worst_dot <= bound_dot, worst_dot, bound_dot,
                    f"{n} sample points"),
        CheckResult(f"{name}: closed-form divergence", closed == 0.0,
                    closed, 0.0),
    ]


def beta_checks(seed=20260822, n_points=1000, h=1.0e-4):
    """Divergence-free and energy-orthogonality identities at random points."""
    rng = np.random.default_rng(seed)
    results = []

    def sample_spherical():
        x = rng.uniform(0.0, 1.0, n_points)
        p = rng.uniform(0.05, 9.0, n_points)
        mu = rng.uniform(-1.0, 1.0, n_points)
        e = rng.uniform(-3.0, 3.0, n_points)
        return (x, p, mu), (e,)

    band_par = build_band("parabolic", m_star=1.3, alpha_k=0.0, p_max=10.0)
    point, args = sample_spherical()
    results += _field_identity_checks(
        "spherical field, parabolic band", BetaSpherical(band_par), point, args, h)

    band_kane = build_band("kane", m_star=0.8, alpha_k=0.6, p_max=10.0)
    point, args = sample_spherical()
    results += _field_identity_checks(
        "spherical field, nonparabolic band", BetaSpherical(band_kane),
        point, args, h)

    x = rng.uniform(0.0, 1.0, n_points)
    y = rng.uniform(0.0, 1.0, n_points)
    w = rng.uniform(2.0 * h, 6.0, n_points)
    mu = rng.uniform(-0.9, 0.9, n_points)
    phi = rng.uniform(0.0, 2.0 * np.pi, n_points)
    e_x = rng.uniform(-2.0, 2.0, n_points)
    e_y = rng.uniform(-2.0, 2.0, n_points)
    results += _field_identity_checks(
        "energy-angle field, five coordinates", BetaKane5(alpha_k=0.5, c_x=1.2, c_k=0.9),
        (x, y, w, mu, phi), (e_x, e_y), h)
    return results


# field solve ------------------------------------------------------------------


def _random_density(rng, x_edges, degree=2):
    n = x_edges.size - 1
    coeffs = rng.normal(0.0, 1.0, (n, degree + 1)) * np.array([1.0, 0.4, 0.15])
    coeffs[:, 0] += 2.0
    return PiecewisePoly(x_edges, coeffs)


def poisson_checks(seed=20260411, n_sources=3, n_eval=50):
    """Residual, boundary, gauge, and compatibility checks for the field solve."""
    rng = np.random.default_rng(seed)
    length = 1.3
    x_edges = np.linspace(0.0, length, 13)
    q, eps_perm, phi_applied = 1.3, 0.7, 0.8
    results = []

    worst_res_d, worst_bc = 0.0, 0.0
    scale_d = 1.0
    for _ in range(n_sources):
        rho = _random_density(rng, x_edges)
        doping = uniform_doping(x_edges, float(rng.uniform(0.5, 2.0)))
        sol = solve_dirichlet(rho, doping, q, eps_perm, phi_applied)
        src = (doping - rho) * (q / eps_perm)
        xs = rng.uniform(0.0, length, n_eval)
        res = np.abs(sol.e_field.derivative().eval_at(xs) - src.eval_at(xs))
        scale_d = max(scale_d, float(np.abs(src.eval_at(xs)).max()))
        worst_res_d = max(worst_res_d, float(np.max(res)))
        worst_bc = max(
            worst_bc,
            abs(sol.phi.eval_at(0.0)),
            abs(sol.phi.eval_at(length) - phi_applied),
        )
    results.append(CheckResult(
        "fixed-potential solve: field derivative matches the source",
        worst_res_d <= 1.0e-10 * scale_d, worst_res_d, 1.0e-10 * scale_d,
        f"{n_sources} random sources, {n_eval} points each"))
    bc_bound = 1.0e-12 * max(1.0, abs(phi_applied))
    results.append(CheckResult(
        "fixed-potential solve: endpoint values",
        worst_bc <= bc_bound, worst_bc, bc_bound))

    worst_res_p, worst_gauge, worst_wrap = 0.0, 0.0, 0.0
    scale_p = 1.0
    for _ in range(n_sources):
        rho = _random_density(rng, x_edges)
        doping = uniform_doping(x_edges, rho.mean())
        sol = solve_periodic(rho, doping, q, eps_perm)
        src = (doping - rho) * (q / eps_perm)
        xs = rng.uniform(0.0, length, n_eval)
        res = np.abs(sol.e_field.derivative().eval_at(xs) - src.eval_at(xs))
        scale_p = max(scale_p, float(np.abs(src.eval_at(xs)).max()))
        worst_res_p = max(worst_res_p, float(np.max(res)))
        phi_lo, phi_hi = sol.phi.minmax()
        phi_scale = max(1.0, abs(phi_lo), abs(phi_hi))
        worst_gauge = max(worst_gauge, abs(sol.phi.mean()) / phi_scale)
        e0 = sol.e_field.values_at_ref(np.array([-1.0]))[0, 0]
        e1 = sol.e_field.values_at_ref(np.array([1.0]))[-1, 0]
        worst_wrap = max(worst_wrap, abs(e1 - e0) / max(1.0, abs(e0), abs(e1)))
    results.append(CheckResult(
        "periodic solve: field derivative matches the source",
        worst_res_p <= 1.0e-10 * scale_p, worst_res_p, 1.0e-10 * scale_p,
        f"{n_sources} random sources, {n_eval} points each"))
    results.append(CheckResult(
        "periodic solve: zero-average gauge",
        worst_gauge <= 1.0e-12, worst_gauge, 1.0e-12))
    results.append(CheckResult(
        "periodic solve: field matches across the wrap",
        worst_wrap <= 1.0e-12, worst_wrap, 1.0e-12))

    rho = _random_density(rng, x_edges)
    bad = uniform_doping(x_edges, rho.mean() + 0.5)
    rejected = False
    try:
        solve_periodic(rho, bad, q, eps_perm)
    except CompatibilityError:
        rejected = True
    results.append(CheckResult(
        "periodic solve: charge imbalance rejected",
        rejected, float(rejected), 1.0))
    return results


# limiter ------------------------------------------------------------------------


def _random_signed_field(space, rng, spread=0.4):
    """Random field with positive cell averages but sign-changing values."""
    shape = (space.mesh.n_x, space.mesh.n_p, space.mesh.n_mu,
             space.n1, space.n1, space.n1)
    coeffs = rng.normal(0.0, spread, shape)
    coeffs[..., 0, 0, 0] = rng.uniform(0.5, 2.0, shape[:3])
    field = DGField(space.degree, coeffs)
    for _ in range(80):
        avg = space.cell_averages(field)
        low = avg < 1.0e-3
        if not low.any():
            break
        damp = np.where(low, 0.5, 1.0)[..., None, None, None]
        coeffs = coeffs * damp
        coeffs[..., 0, 0, 0] = field.coeffs[..., 0, 0, 0]
        field = DGField(space.degree, coeffs)
    return field


def limiter_checks(seed=20260117):
    """Average preservation, idempotence, and nonnegativity on random cells."""
    rng = np.random.default_rng(seed)
    mesh = build_mesh(10, 10, 10, 1.0, 4.0)
    space = DGSpace(mesh, 1)
    control = ControlPointSet(space)

    field = _random_signed_field(space, rng)
    avg_before = space.cell_averages(field)
    limited, count = limit_nonnegative(space, field, control)
    avg_after = space.cell_averages(limited)

    scale = max(float(np.abs(avg_before).max()), 1.0)
    davg = float(np.abs(avg_after - avg_before).max())
    bound_avg = 1.0e-14 * scale

    post_min = control.global_min(limited)
    bound_min = -1.0e-14 * scale

    again, count2 = limit_nonnegative(space, limited, control)
    drift2 = float(np.abs(again.coeffs - limited.coeffs).max())

    n_cells = int(np.prod(avg_before.shape))
    return [
        CheckResult("limiter: cell averages preserved",
                    davg <= bound_avg, davg, bound_avg,
                    f"{n_cells} random cells, {count} rescaled"),
        CheckResult("limiter: control points nonnegative after one pass",
                    post_min >= bound_min, post_min, bound_min),
        CheckResult("limiter: idempotent",
                    count2 == 0 and drift2 == 0.0, drift2 + count2, 0.0),
        CheckResult("limiter: battery exercised the rescale path",
                    count > 0, float(count), 1.0),
    ]


# step-size certificates -----------------------------------------------------------


def cfl_checks():
    """Closed-form split optimum plus kernel behavior on simple scenes."""
    results = []

    alpha, dt = optimal_alpha(1.0, 3.0)
    exact = (alpha == 0.75) and (dt == 0.75)
    results.append(CheckResult(
        "split optimum at kernels (1, 3) is exactly (0.75, 0.75)",
        exact, max(abs(alpha - 0.75), abs(dt - 0.75)), 0.0))

    alpha, dt = optimal_alpha(2.0, 2.0)
    results.append(CheckResult(
        "split optimum at equal kernels is the midpoint",
        alpha == 0.5 and dt == 1.0, max(abs(alpha - 0.5), abs(dt - 1.0)), 0.0))

    alpha, dt = optimal_alpha(2.0, np.inf)
    results.append(CheckResult(
        "collisionless limit: step approaches the transport kernel",
        abs(dt - 2.0) <= 1.0e-8 * 2.0 and alpha < 1.0, abs(dt - 2.0),
        1.0e-8 * 2.0))

    alpha, dt = optimal_alpha(np.inf, 3.0)
    results.append(CheckResult(
        "transport-free limit: step approaches the collision kernel",
        abs(dt - 3.0) <= 1.0e-8 * 3.0 and alpha > 0.0, abs(dt - 3.0),
        1.0e-8 * 3.0))

    failed = False
    try:
        optimal_alpha(0.0, 0.0)
    except StepFailure:
        failed = True
    results.append(CheckResult(
        "zero kernels raise a step failure", failed, float(failed), 1.0))

    mesh = build_mesh(8, 8, 8, 1.0, 2.0)
    space = DGSpace(mesh, 1)
    band = build_band("parabolic", m_star=1.0, alpha_k=0.0, p_max=2.0)
    pot = zero_potential(mesh.x_edges)
    a_x, a_p, a_mu = transport_kernels(space, band, pot)
    w_hat = space.lob.weights[-1] / 2.0
    expected = w_hat * (1.0 / 8.0) / band.velocity(2.0)
    results.append(CheckResult(
        "field-free kernels: forcing directions unbounded",
        np.isinf(a_p) and np.isinf(a_mu), float(min(a_p, a_mu)), np.inf))
    results.append(CheckResult(
        "field-free kernels: position kernel matches the closed form",
        abs(a_x - expected) <= 1.0e-12 * expected, abs(a_x - expected),
        1.0e-12 * expected))

    mesh2 = build_mesh(8, 8, 8, 2.0, 2.0)
    space2 = DGSpace(mesh2, 1)
    a2_x = transport_kernels(space2, band, zero_potential(mesh2.x_edges))[0]
    results.append(CheckResult(
        "position kernel scales linearly with the cell size",
        abs(a2_x - 2.0 * a_x) <= 1.0e-12 * a2_x, abs(a2_x - 2.0 * a_x),
        1.0e-12 * a2_x))

    dts = transport_cfl(space, band, pot, 0.5, (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))
    expect_x = 0.5 * (1.0 / 3.0) * a_x
    results.append(CheckResult(
        "directional bounds apply the split and simplex weights",
        abs(dts[0] - expect_x) <= 1.0e-12 * expect_x
        and np.isinf(dts[1]) and np.isinf(dts[2]),
        abs(dts[0] - expect_x), 1.0e-12 * expect_x))

    params = ScatteringParams(coupling=0.0, hbar_omega=0.0, n_ph=0.0, elastic=0.5)
    got = collision_cfl_split(space, band, params, 0.4)
    nu_peak = 4.0 * np.pi * 0.5 * band.shell_weight(2.0)
    want = 0.6 / nu_peak
    results.append(CheckResult(
        "loss-split bound matches the peak collision frequency",
        abs(got - want) <= 1.0e-10 * want, abs(got - want), 1.0e-10 * want))
    return results


# collision dissipativity -------------------------------------------------------


def _random_positive_field(space, band, rng, lo=0.05, hi=1.0):
    shape = (space.mesh.n_x, space.mesh.n_p, space.mesh.n_mu,
             space.nq, space.nq, space.nq)
    envelope = np.exp(-band.energy(space.p_nodes))[None, :, None, None, :, None]
    vals = rng.uniform(lo, hi, shape) * envelope
    return space.project_node_values(vals)


def dissipativity_checks(seed=20260530, n_fields=20):
    """Entropy production of the momentum-randomizing channel stays nonpositive."""
    rng = np.random.default_rng(seed)
    mesh = build_mesh(4, 24, 8, 1.0, 4.0)
    space = DGSpace(mesh, 1)
    band = build_band("parabolic", m_star=1.0, alpha_k=0.0, p_max=4.0)
    params = ScatteringParams(coupling=0.0, hbar_omega=0.0, n_ph=0.0, elastic=0.7)
    op = CollisionOperator(space, band, params)
    control = ControlPointSet(space, op.table, op.gain_weight)
    diag = Diagnostics(space, band, q=1.0, periodic=True)
    pot = zero_potential(mesh.x_edges)

    u = space.gl.weights
    w_pr = np.exp(band.energy(space.p_nodes)) * space.p_sq
    worst = -np.inf
    for _ in range(n_fields):
        field = _random_positive_field(space, band, rng)
        field, _ = limit_nonnegative(space, field, control)
        production = diag.collision_entropy_production(op, field, pot)
        f_nodes = space.node_values(field)
        weighted = f_nodes * op.nu_nodes[None, :, None, None, :, None]
        loss = float(contract(
            "ikmsrq,ikmsrq,kr,s,r,q,ikm->",
            weighted, f_nodes, w_pr, u, u, u, space.jac))
        worst = max(worst, production / loss)
    return [CheckResult(
        "collision entropy production nonpositive on random positive states",
        worst <= 1.0e-10, worst, 1.0e-10,
        f"{n_fields} seeded fields, normalized by the loss quadratic")]


# semi-discrete entropy inequality ------------------------------------------------


_ENTROPY_SCENE = """
[mesh]
N_x = 16
N_p = 16
N_mu = 8
L = 1.0
p_max = 3.5

[scattering]
c0 = 0.8

[poisson]
bc = periodic
N0 = 1.0

[numerics]
degree = 1
"""


def entropy_inequality_checks(seed=20260808, n_fields=20):
    """Tested growth rate vs interface dissipation on random positive states."""
    rng = np.random.default_rng(seed)
    cfg = parse_config_text(_ENTROPY_SCENE)
    solver, space, band, _ = build_solver(cfg)
    x_edges = space.mesh.x_edges

    worst = -np.inf
    n_passed = 0
    for _ in range(n_fields):
        field = _random_positive_field(space, band, rng, lo=0.1, hi=1.0)
        field, _ = limit_nonnegative(space, field, solver.control)
        rho = compute_density(space, field)
        doping = uniform_doping(x_edges, rho.mean())
        pot = solve_periodic(rho, doping, cfg.poisson.q, cfg.poisson.epsilon_perm)
        report = solver.semi_discrete_entropy_check(field, pot)
        n_passed += int(report.passed)
        excess = (report.lhs - report.rhs) / max(
            abs(report.lhs), abs(report.rhs), 1.0e-300)
        worst = max(worst, excess)
    return [CheckResult(
        "weighted growth rate bounded by interface dissipation",
        n_passed == n_fields, worst, 1.0e-10,
        f"{n_passed}/{n_fields} random states, worst normalized excess")]


# collision equilibrium ------------------------------------------------------------


_EQUILIBRIUM_SCENE = """
[mesh]
N_x = 1
N_p = 512
N_mu = 1
L = 1.0
p_max = 4.0

[scattering]
K = 1.0e-3
hbar_omega = 1.0
n_ph = thermal

[poisson]
bc = periodic
N0 = 1.0

[numerics]
degree = 2
rk = 2
"""


def equilibrium_checks(n_steps=100, dt=2.0e-4):
    """The projected thermal state annihilates the collision operator."""
    cfg = parse_config_text(_EQUILIBRIUM_SCENE)
    solver, space, band, f0 = build_solver(cfg)
    op = solver.collision

    f_nodes = space.node_values(f0)
    q_nodes = op.q_at_nodes(f0, f_nodes)
    denom = op.nu_nodes[None, :, None, None, :, None] * f_nodes
    worst_ratio = float((np.abs(q_nodes) / denom).max())
    results = [CheckResult(
        "pointwise balance at the thermal state",
        worst_ratio <= 1.0e-6, worst_ratio, 1.0e-6,
        "gain against loss at every interior quadrature node")]

    pot = solver.potential_for(f0)
    kernels = transport_kernels(space, band, pot, q=cfg.poisson.q)
    s = equalized_simplex(kernels)
    transport_dt = min(transport_cfl(space, band, pot, 0.5, s, q=cfg.poisson.q))
    coll_dt = collision_cfl(space, op, f0, 0.5)
    results.append(CheckResult(
        "collision bound dwarfs the transport step near equilibrium",
        coll_dt >= 1.0e6 * transport_dt, coll_dt, 1.0e6 * transport_dt,
        f"transport step {transport_dt:.3e}"))

    budget = solver.budget(f0, pot)
    results.append(CheckResult(
        "stationarity march stays inside the certified step",
        dt <= budget.dt, dt, budget.dt))

    norm0 = space.l2_p2_norm(f0)
    f = f0
    for _ in range(n_steps):
        f, _, _ = solver.advance(f, dt)
    diff = DGField(f.degree, f.coeffs - f0.coeffs)
    drift = space.l2_p2_norm(diff) / norm0
    results.append(CheckResult(
        "thermal state stationary over the march",
        drift <= 1.0e-10, drift, 1.0e-10,
        f"{n_steps} steps of size {dt:g}, relative drift"))
    return results


# mass conservation ----------------------------------------------------------------


_MASS_SCENE = """
[mesh]
N_x = 16
N_p = 20
N_mu = 8
L = 1.0
p_max = 5.0

[scattering]
c0 = 0.8

[poisson]
bc = periodic
N0 = 1.0

[numerics]
degree = 1

[initial]
kind = maxwellian
x_amplitude = 0.0
mu_amplitude = 0.3
"""


def mass_conservation_checks(n_steps=100):
    """Total mass held to roundoff when the energy range never saturates."""
    cfg = parse_config_text(_MASS_SCENE)
    solver, space, band, f0 = build_solver(cfg)
    m0 = solver.total_mass(f0)
    result = solver.run(f0, t_final=None, max_steps=n_steps)
    drift = max(abs(rec.mass - m0) for rec in result.records) / m0
    leak = max(abs(rec.chi_mass_leak) for rec in result.records)
    return [
        CheckResult("march completed", result.status == "ok",
                    float(result.steps), float(n_steps), result.error),
        CheckResult("relative mass drift", drift <= 1.0e-9, drift, 1.0e-9,
                    f"{n_steps} steps, anisotropic start"),
        CheckResult("cutoff mass leak at roundoff",
                    leak <= 1.0e-13 * m0, leak, 1.0e-13 * m0),
    ]


# convergence ---------------------------------------------------------------------


def _free_streaming_error(n_x, n_p, n_mu, degree, t_final, p_max, length, safety):
    """March a field-free wave and compare against the exact translate."""
    mesh = build_mesh(n_x, n_p, n_mu, length, p_max)
    space = DGSpace(mesh, degree)
    band = build_band("parabolic", m_star=1.0, alpha_k=0.0, p_max=p_max)
    transport = TransportOperator(space, band, BoundarySpec(kind="periodic"))
    pot = zero_potential(mesh.x_edges)
    two_pi = 2.0 * np.pi / length

    def initial(x, p, mu):
        return (1.1 + np.sin(two_pi * x)) * p * (1.0 + 0.5 * mu)

    f = space.project(initial)
    a_x = transport_kernels(space, band, pot)[0]
    steps = max(1, math.ceil(t_final / (safety * a_x)))
    dt = t_final / steps
    for _ in range(steps):
        u1 = DGField(degree, f.coeffs + dt * transport.rhs(f, pot).coeffs)
        f = DGField(degree, 0.5 * f.coeffs
                    + 0.5 * (u1.coeffs + dt * transport.rhs(u1, pot).coeffs))

    def exact(x, p, mu):
        shift = x - band.velocity(p) * mu * t_final
        return (1.1 + np.sin(two_pi * shift)) * p * (1.0 + 0.5 * mu)

    err = space.l2_p2_error(f, exact)
    return {"n_x": n_x, "error": err, "steps": steps, "dt": dt}


def convergence_study(levels=(32, 64), n_p=32, n_mu=32, degree=1,
                      t_final=0.02, p_max=4.0, length=1.0, safety=0.8,
                      threads=1):
    """Field-free wave errors across position refinements, plus the orders."""
    args = [(n, n_p, n_mu, degree, t_final, p_max, length, safety)
            for n in levels]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda a: _free_streaming_error(*a), args))
    else:
        rows = [_free_streaming_error(*a) for a in args]
    orders = [
        math.log2(rows[i]["error"] / rows[i + 1]["error"])
        for i in range(len(rows) - 1)
    ]
    return rows, orders


def temporal_order_check(n_steps=12):
    """Self-convergence of the two-stage march on a frozen advection scene."""
    mesh = build_mesh(16, 16, 8, 1.0, 4.0)
    space = DGSpace(mesh, 1)
    band = build_band("parabolic", m_star=1.0, alpha_k=0.0, p_max=4.0)
    transport = TransportOperator(space, band, BoundarySpec(kind="periodic"))
    pot = zero_potential(mesh.x_edges)

    def initial(x, p, mu):
        return (1.1 + np.sin(2.0 * np.pi * x)) * p * (1.0 + 0.5 * mu)

    f0 = space.project(initial)
    dt0 = 0.5 * transport_kernels(space, band, pot)[0]

    def march(dt, steps):
        f = f0
        for _ in range(steps):
            u1 = DGField(1, f.coeffs + dt * transport.rhs(f, pot).coeffs)
            f = DGField(1, 0.5 * f.coeffs
                        + 0.5 * (u1.coeffs + dt * transport.rhs(u1, pot).coeffs))
        return f

    coarse = march(dt0, n_steps)
    mid = march(dt0 / 2.0, 2 * n_steps)
    fine = march(dt0 / 4.0, 4 * n_steps)
    d1 = space.l2_p2_norm(DGField(1, coarse.coeffs - mid.coeffs))
    d2 = space.l2_p2_norm(DGField(1, mid.coeffs - fine.coeffs))
    order = math.log2(d1 / d2)
    return CheckResult(
        "two-stage march reaches second order in time",
        order >= 1.9, order, 1.9,
        f"self-convergence over {n_steps} base steps")


def convergence_checks(threads=1):
    """Acceptance-facing order checks: at least 1.5 in position, 1.9 in time."""
    rows, orders = convergence_study(threads=threads)
    detail = ", ".join(
        f"N_x={r['n_x']}: error={r['error']:.3e}" for r in rows)
    results = [CheckResult(
        "position refinement order for the field-free wave",
        orders[0] >= 1.5, orders[0], 1.5, detail)]
    results.append(temporal_order_check())
    return results


# suite ---------------------------------------------------------------------------


INVARIANT_BATTERIES = (
    ("advection-field identities", beta_checks),
    ("field solve", poisson_checks),
    ("limiter", limiter_checks),
    ("step-size certificates", cfl_checks),
    ("collision dissipativity", dissipativity_checks),
    ("entropy inequality", entropy_inequality_checks),
    ("collision equilibrium", equilibrium_checks),
    ("mass conservation", mass_conservation_checks),
)


def run_invariant_suite(threads=1):
    """Run every battery; returns [(battery name, [CheckResult, ...]), ...]."""
    names = [name for name, _ in INVARIANT_BATTERIES]
    funcs = [func for _, func in INVARIANT_BATTERIES]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_results = list(pool.map(lambda f: f(), funcs))
    else:
        all_results = [f() for f in funcs]
    return list(zip(names, all_results))


# long-run scenarios --------------------------------------------------------------


_RELAXATION_SCENE = """
[mesh]
N_x = 16
N_p = 16
N_mu = 8
L = 1.0
p_max = 4.75

[scattering]
c0 = 0.5

[poisson]
bc = periodic
N0 = 1.0

[numerics]
degree = 1
cfl_safety = 0.9
"""


def _windowed_current_wave(solver, space, band, n0, amplitude=0.4, kappa=0.5):
    """Maxwellian carrying a current wave with no weight at small momentum.

    Slow carriers neither scatter nor stream (both rates vanish with p), so
    any current structure seeded there takes a power-law time to die; the
    p^2/(kappa + p^2) window keeps the transient clear of that bottleneck.
    """
    length = space.mesh.length

    def initial(x, p, mu):
        w = p * p / (kappa + p * p)
        return (1.0 + amplitude * np.sin(2.0 * np.pi * x / length) * w * mu) \
            * np.exp(-band.energy(p))

    f = space.project(initial)
    return DGField(f.degree, f.coeffs * (n0 * length / solver.total_mass(f)))


def _worst_relative_rise(values):
    return max((b - a) / abs(a) for a, b in zip(values, values[1:]))


def entropy_decay_frozen_checks(n_steps=400):
    """Entropy norm never rises while the potential is held at its initial value."""
    cfg = parse_config_text(preset_text("periodic-relaxation"))
    cfg.numerics.poisson_refresh = "frozen"
    solver, space, band, f0 = build_solver(cfg)
    t0 = time.perf_counter()
    result = solver.run(f0, t_final=None, max_steps=n_steps)
    wall = time.perf_counter() - t0
    ent = [rec.entropy_norm for rec in result.records]
    worst = _worst_relative_rise(ent)
    return [
        CheckResult("frozen-field march completed", result.status == "ok",
                    float(result.steps), float(n_steps), result.error),
        CheckResult("entropy norm non-increasing under a frozen field",
                    worst <= 1.0e-10, worst, 1.0e-10,
                    f"worst relative step change over {len(ent) - 1} steps"),
        CheckResult("frozen-field run fits the time budget",
                    wall < 60.0, wall, 60.0, "seconds"),
    ]


def entropy_decay_selfconsistent_checks(max_steps=6000, t_final=14.0, n_post=100):
    """Entropy norm never rises once the self-consistent current has flattened."""
    cfg = parse_config_text(_RELAXATION_SCENE)
    solver, space, band, _ = build_solver(cfg)
    f0 = _windowed_current_wave(solver, space, band, cfg.poisson.N0)

    state = {"post": 0, "j_peak": 0.0, "flat": False}

    def stop(n, rec, field, potential):
        state["j_peak"] = max(state["j_peak"], abs(rec.J_min), abs(rec.J_max))
        if state["flat"]:
            state["post"] += 1
        elif rec.J_max - rec.J_min <= 1.0e-6 * state["j_peak"]:
            state["flat"] = True
        return state["post"] >= n_post

    result = solver.run(f0, t_final=t_final, max_steps=max_steps, on_step=stop)
    checks = [
        CheckResult("self-consistent march completed", result.status == "ok",
                    float(result.steps), float(max_steps), result.error),
        CheckResult("current spread collapsed below 1e-6 of its peak",
                    result.flattened_at is not None,
                    float(result.flattened_at if result.flattened_at is not None
                          else -1), float(max_steps)),
    ]
    if result.flattened_at is not None:
        pre = [rec.entropy_norm for rec in result.records[:result.flattened_at + 1]]
        post = [rec.entropy_norm for rec in result.records[result.flattened_at:]]
        worst = _worst_relative_rise(post)
        detail = (f"{len(post) - 1} flattened steps; {len(pre)} earlier records "
                  f"logged, worst pre-flattening change {_worst_relative_rise(pre):.3e}")
        checks.append(CheckResult(
            "entropy norm non-increasing after current flattening",
            worst <= 1.0e-10, worst, 1.0e-10, detail))
    return checks


def positivity_run_checks(n_steps=500):
    """Control-point floor and cell averages through a biased-diode transient."""
    cfg = parse_config_text(preset_text("diode-400nm"))
    solver, space, band, f0 = build_solver(cfg)

    state = {"min_avg": np.inf, "max_avg": 0.0}

    def watch(n, rec, field, potential):
        avg = space.cell_averages(field)
        state["min_avg"] = min(state["min_avg"], float(avg.min()))
        state["max_avg"] = max(state["max_avg"], float(avg.max()))
        return False

    result = solver.run(f0, t_final=None, max_steps=n_steps, on_step=watch)
    min_control = min(rec.min_control_value for rec in result.records)
    floor = -1.0e-13 * state["max_avg"]
    fired = sum(rec.limiter_count for rec in result.records)
    return [
        CheckResult("diode march completed", result.status == "ok",
                    float(result.steps), float(n_steps), result.error),
        CheckResult("control points stay above the positivity floor",
                    min_control >= floor, min_control, floor,
                    f"limiter rescaled {fired} cells over {result.steps} steps"),
        CheckResult("no negative cell averages", state["min_avg"] >= 0.0,
                    state["min_avg"], 0.0),
    ]


SCENARIO_BATTERIES = (
    ("entropy decay, frozen field", entropy_decay_frozen_checks),
    ("entropy decay, self-consistent", entropy_decay_selfconsistent_checks),
    ("positivity under bias", positivity_run_checks),
)


def run_scenario_suite():
    """Run the long-march scenario batteries; same shape as the invariant suite."""
    return [(name, func()) for name, func in SCENARIO_BATTERIES]
