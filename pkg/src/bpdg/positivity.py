"""Positivity machinery: step-size certificates and the scaling limiter.

The forward-Euler update stays nonnegative at the control points when
the step splits into per-direction transport pieces (each a convex
combination of upwinded cell values) plus a collision piece.  The
transport kernel of each direction is the alpha-free, simplex-free part
of its step bound; the collision bound comes either from the whole
collision term or from the loss-split fallback 1 / nu_max.  The scaling
limiter then pulls each cell toward its nonnegative p^2-weighted average
without moving that average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contraction import contract

from .errors import StepFailure
from .field import DGField, DGSpace
from .mesh import gauss_lobatto, legendre_values, physical_nodes

_TINY_S = 1.0e-12
_ALPHA_CLAMP = 1.0 - 1.0e-9


def _endpoint_weight(space: DGSpace):
    """Endpoint weight of the (k+2)-point Lobatto rule, normalized to sum 1."""
    return space.lob.weights[-1] / 2.0


def _union_nodes(space: DGSpace):
    return np.concatenate([space.gl.nodes, space.lob.nodes])


def transport_kernels(space: DGSpace, band, potential, q=1.0):
    """Alpha- and simplex-free per-direction step bounds (A_x, A_p, A_mu).

    Each kernel is w_hat * min over cells of (cell size) / (max speed *
    max geometric face weight); an unforced direction reports inf.
    """
    mesh = space.mesh
    w_hat = _endpoint_weight(space)
    ref = _union_nodes(space)

    # speeds sampled on the union of volume and endpoint nodes per p-cell
    p_union = physical_nodes(mesh.p_edges, ref)
    v_max = np.abs(band.velocity(p_union)).max(axis=1)

    mu_edge_abs = np.abs(mesh.mu_edges)
    mu_face_max = np.maximum(mu_edge_abs[:-1], mu_edge_abs[1:])
    geom = 1.0 - mesh.mu_edges**2
    geom_face_max = np.maximum(geom[:-1], geom[1:])

    e_max = np.abs(potential.e_at_nodes(ref)).max(axis=1)
    e_peak = float(e_max.max()) if e_max.size else 0.0

    with np.errstate(divide="ignore"):
        a_x = w_hat * np.min(
            mesh.dx[:, None, None]
            / (v_max[None, :, None] * mu_face_max[None, None, :])
        )

        if q * e_peak == 0.0:
            a_p = np.inf
            a_mu = np.inf
        else:
            a_p = w_hat * np.min(
                mesh.dp[None, :, None]
                / (q * e_max[:, None, None] * mu_face_max[None, None, :])
            )
            # effective lower momentum: cell edge, or the first interior
            # Lobatto abscissa of the cell touching p = 0
            p_lo = mesh.p_edges[:-1].copy()
            lob = gauss_lobatto(space.nq)
            p_lo[0] = mesh.dp[0] * (1.0 + lob.nodes[1]) / 2.0
            a_mu = w_hat * np.min(
                (mesh.dmu[None, :] * p_lo[:, None])
                / (q * e_peak * geom_face_max[None, :])
            )
    return float(a_x), float(a_p), float(a_mu)


def _check_alpha_s(alpha, s):
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if len(s) != 3 or any(v <= 0 for v in s) or abs(sum(s) - 1.0) > 1.0e-12:
        raise ValueError("s must be three positive weights summing to 1")


def transport_cfl(space: DGSpace, band, potential, alpha, s, q=1.0):
    """Per-direction certified step bounds (dt_x, dt_p, dt_mu).

    Each equals alpha * s_l * kernel_l; unforced directions report inf.
    """
    _check_alpha_s(alpha, s)
    kernels = transport_kernels(space, band, potential, q)
    return tuple(alpha * sv * av for sv, av in zip(s, kernels))


def collision_cfl(space: DGSpace, collision_op, field: DGField, alpha):
    """Whole-term collision bound (1 - alpha) * min f/|Q| over Q < 0 nodes.

    Reports 0 when f vanishes where Q < 0; callers fall back to the
    loss-split bound.  inf when Q >= 0 everywhere.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return (1.0 - alpha) * collision_kernel_whole(space, collision_op, field)


def collision_cfl_split(space: DGSpace, band, params, alpha):
    """Loss-split bound (1 - alpha) / nu_max over the p quadrature points."""
    from .collision import collision_frequency

    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if not params.is_active:
        return np.inf
    p_union = physical_nodes(space.mesh.p_edges, _union_nodes(space))
    nu_max = float(collision_frequency(band, params, p_union).max())
    if nu_max <= 0.0:
        return np.inf
    return (1.0 - alpha) / nu_max


def collision_kernel_whole(space: DGSpace, collision_op, field: DGField):
    """Step bound from the whole collision term: min f / |Q| where Q < 0.

    Evaluated at the volume quadrature nodes; inf when Q >= 0 everywhere.
    """
    if collision_op is None or not collision_op.params.is_active:
        return np.inf
    f_nodes = space.node_values(field)
    q_nodes = collision_op.q_at_nodes(field, f_nodes)
    neg = q_nodes < 0.0
    if not neg.any():
        return np.inf
    ratios = np.where(neg, np.maximum(f_nodes, 0.0), np.inf) / np.where(
        neg, -q_nodes, 1.0
    )
    return float(ratios.min())


def collision_kernel_split(collision_op):
    """Loss-split fallback bound 1 / nu_max."""
    if collision_op is None or not collision_op.params.is_active:
        return np.inf
    if collision_op.nu_max <= 0.0:
        return np.inf
    return 1.0 / collision_op.nu_max


def optimal_alpha(transport_kernel, collision_kernel):
    """Split alpha maximizing dt = min(alpha A, (1 - alpha) B).

    The optimum equalizes both sides: alpha = B / (A + B), dt = AB / (A + B).
    Either kernel may be inf; both zero is unsteppable.
    """
    a, b = float(transport_kernel), float(collision_kernel)
    if a < 0 or b < 0:
        raise ValueError("kernels must be nonnegative")
    if a == 0.0 and b == 0.0:
        raise StepFailure("both transport and collision kernels are zero")
    if np.isinf(a) and np.isinf(b):
        return 0.5, np.inf
    if np.isinf(b):
        return _ALPHA_CLAMP, _ALPHA_CLAMP * a
    if np.isinf(a):
        return 1.0 - _ALPHA_CLAMP, _ALPHA_CLAMP * b
    alpha = b / (a + b)
    return alpha, a * b / (a + b)


@dataclass(frozen=True)
class CFLBudget:
    dt: float
    alpha: float
    s: tuple
    kernels: tuple  # (A_x, A_p, A_mu)
    transport_kernel: float  # harmonic combination min_l s_l A_l
    collision_kernel: float
    collision_route: str  # "whole", "split", or "none"
    binding: str  # "x", "p", "mu", or "collision"
    safety: float


def equalized_simplex(kernels):
    """Simplex weights s_l proportional to 1 / A_l (equalized s_l A_l)."""
    inv = np.array([0.0 if np.isinf(a) else 1.0 / a for a in kernels])
    if inv.sum() == 0.0:
        s = np.full(3, 1.0 / 3.0)
    else:
        s = inv / inv.sum()
        s = np.maximum(s, _TINY_S)
        s = s / s.sum()
    return tuple(float(v) for v in s)


def compute_budget(
    space: DGSpace,
    band,
    potential,
    field: DGField,
    collision_op=None,
    q=1.0,
    alpha="auto",
    s="auto",
    safety=1.0,
):
    """Assemble the certified step size for the current state.

    alpha="auto" balances transport against collision; an explicit float
    fixes the split.  s="auto" equalizes the three transport directions.
    """
    kernels = transport_kernels(space, band, potential, q)
    if s == "auto":
        s_weights = equalized_simplex(kernels)
    else:
        s_weights = tuple(float(v) for v in s)
        if len(s_weights) != 3 or any(v <= 0 for v in s_weights):
            raise ValueError("s must be three positive weights")
        total = sum(s_weights)
        if abs(total - 1.0) > 1.0e-12:
            s_weights = tuple(v / total for v in s_weights)

    directional = [sv * av for sv, av in zip(s_weights, kernels)]
    a = min(directional)

    b_whole = collision_kernel_whole(space, collision_op, field)
    b_split = collision_kernel_split(collision_op)
    if np.isinf(b_whole) and np.isinf(b_split):
        b, route = np.inf, "none"
    elif b_whole >= b_split:
        b, route = b_whole, "whole"
    else:
        b, route = b_split, "split"

    if alpha == "auto":
        alpha_val, dt = optimal_alpha(a, b)
    else:
        alpha_val = float(alpha)
        if not 0.0 < alpha_val < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        dt = min(alpha_val * a if not np.isinf(a) else np.inf,
                 (1.0 - alpha_val) * b if not np.isinf(b) else np.inf)
        if np.isinf(dt):
            raise StepFailure("no finite step bound: free streaming with no field")

    if not np.isfinite(dt) or dt <= 0.0:
        raise StepFailure(f"step certificate collapsed: dt = {dt}")

    names = ("x", "p", "mu")
    candidates = [alpha_val * d for d in directional] + [
        (1.0 - alpha_val) * b if not np.isinf(b) else np.inf
    ]
    binding_idx = int(np.argmin(candidates))
    binding = names[binding_idx] if binding_idx < 3 else "collision"

    return CFLBudget(
        dt=float(safety * dt),
        alpha=float(alpha_val),
        s=s_weights,
        kernels=tuple(float(k) for k in kernels),
        transport_kernel=float(a),
        collision_kernel=float(b),
        collision_route=route,
        binding=binding,
        safety=float(safety),
    )


class ControlPointSet:
    """Evaluation points at which the limited field must be nonnegative.

    Tensor points are the union of Gauss-Legendre and Gauss-Lobatto
    (k+2)-point grids in each direction.  When a collision shift table is
    supplied, the gather sites of the gain term (shifted momenta paired
    with every x and mu node) join the set, so the gain stays a positive
    combination of control values.
    """

    def __init__(self, space: DGSpace, shift_table=None, gain_weight=None):
        self.space = space
        nodes = _union_nodes(space)
        self.tensor_basis = legendre_values(nodes, space.degree)
        self.gain_owner = None
        self.gain_basis = None
        if shift_table is not None:
            live = shift_table.chi > 0.0
            # the zero-shift row gathers at the volume Gauss nodes, which the
            # tensor grid already contains; rows with zero rate never gather
            signs = np.asarray(shift_table.signs).reshape(-1, 1, 1)
            live &= signs != 0
            if gain_weight is not None:
                live &= gain_weight > 0.0
            live = live.reshape(-1)
            owners = shift_table.owner.reshape(-1)[live]
            basis = shift_table.basis.reshape(-1, space.n1)[live]
            if owners.size:
                self.gain_owner = owners
                self.gain_basis = basis

    def min_per_cell(self, field: DGField):
        sp = self.space
        vb = self.tensor_basis
        # contract one mode axis at a time; each tensordot is a small BLAS call
        vals = field.coeffs
        for _ in range(3):
            vals = np.tensordot(vals, vb, axes=(3, 1))
        mins = vals.min(axis=(3, 4, 5))
        if self.gain_owner is not None:
            v = sp.V
            sliced = contract(
                "izmabc,sa,zb,qc->izmsq",
                field.coeffs[:, self.gain_owner], v, self.gain_basis, v,
            )
            cand = sliced.min(axis=(3, 4))
            gm = np.full_like(mins, np.inf)
            # scatter-min onto owner cells; the transpose is a writable view
            np.minimum.at(gm.transpose(1, 0, 2), self.gain_owner,
                          cand.transpose(1, 0, 2))
            mins = np.minimum(mins, gm)
        return mins

    def global_min(self, field: DGField):
        return float(self.min_per_cell(field).min())


def limit_nonnegative(space: DGSpace, field: DGField, control: ControlPointSet):
    """Scale each cell toward its average until all control points are >= 0.

    Returns (limited field, number of cells rescaled).  The p^2-weighted
    cell average is preserved exactly.  A genuinely negative average is a
    hard error; averages negative at roundoff level are snapped to zero.
    """
    avg = space.cell_averages(field)
    scale = float(np.abs(avg).max())
    floor = -1.0e-12 * max(scale, 1.0)
    if (avg < floor).any():
        worst = float(avg.min())
        raise StepFailure(f"negative cell average {worst:.3e} reached the limiter")
    avg = np.maximum(avg, 0.0)

    mins = control.min_per_cell(field)
    # roundoff-level dips are left alone: keeps the map exactly idempotent
    need = mins < -1.0e-15 * max(scale, 1.0)
    if not need.any():
        return field, 0

    denom = np.where(need, avg - mins, 1.0)
    theta = np.where(need, avg / denom, 1.0)
    theta = np.clip(theta, 0.0, 1.0)

    coeffs = field.coeffs * theta[..., None, None, None]
    coeffs[..., 0, 0, 0] += (1.0 - theta) * avg
    return DGField(field.degree, coeffs), int(need.sum())
