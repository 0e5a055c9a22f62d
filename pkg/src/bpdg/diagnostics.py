"""Entropy-norm accounting, face dissipation, and run records.

The stability estimates control the weighted norm int f^2 e^H p^2 dV
with H = eps(p) - q Phi(x).  Because e^H is not a polynomial, all
weighted integrals here use an elevated Gauss rule (two nodes beyond the
volume rule).  The face dissipation collects (1/4) [f]^2 |beta . n| e^H
over interior faces (plus the periodic wrap in x); the momentum-domain
top face is excluded, its outflow term being separately dissipative.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .contraction import contract

from .field import DGField, DGSpace
from .mesh import gauss_legendre, legendre_values, physical_nodes

CSV_COLUMNS = (
    "t",
    "dt",
    "binding",
    "mass",
    "entropy_norm",
    "jump_dissipation",
    "J_min",
    "J_max",
    "min_control_value",
    "limiter_count",
    "chi_mass_leak",
)


@dataclass(frozen=True)
class StepRecord:
    t: float
    dt: float
    binding: str
    mass: float
    entropy_norm: float
    jump_dissipation: float
    J_min: float
    J_max: float
    min_control_value: float
    limiter_count: int
    chi_mass_leak: float

    def row(self):
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if isinstance(value, str):
                out.append(value)
            elif isinstance(value, (int, np.integer)) and not isinstance(value, bool):
                out.append(str(int(value)))
            else:
                out.append(repr(float(value)))
        return ",".join(out)


@dataclass(frozen=True)
class EntropyReport:
    lhs: float  # <rate, f e^H>, half the entropy-norm time derivative
    rhs: float  # -jump_dissipation
    entropy_norm: float
    jump_dissipation: float
    slack: float
    passed: bool


class Diagnostics:
    """Weighted-norm evaluations bound to one discretization."""

    def __init__(self, space: DGSpace, band, q=1.0, periodic=True, n_extra=2):
        self.space = space
        self.band = band
        self.q = float(q)
        self.periodic = bool(periodic)
        mesh = space.mesh

        rule = gauss_legendre(space.nq + n_extra)
        self.rule = rule
        self.Ve = legendre_values(rule.nodes, space.degree)
        self.xe = physical_nodes(mesh.x_edges, rule.nodes)
        self.pe = physical_nodes(mesh.p_edges, rule.nodes)
        self.mue = physical_nodes(mesh.mu_edges, rule.nodes)
        self.eps_e = band.energy(self.pe)
        self.v_e = band.velocity(self.pe)
        self.p_sq_e = self.pe**2
        self.eps_p_edges = band.energy(mesh.p_edges)
        self.tr_lo = legendre_values(np.array([-1.0]), space.degree)[0]
        self.tr_hi = legendre_values(np.array([1.0]), space.degree)[0]

    # weighted integrals -----------------------------------------------------

    def _phi_at_volume_nodes(self, potential):
        return potential.phi_at_nodes(self.rule.nodes)  # (n_x, ne)

    def entropy_norm(self, field: DGField, potential):
        """int f^2 e^{eps - q Phi} p^2 dV via elevated quadrature."""
        sp = self.space
        u = self.rule.weights
        fe = contract(
            "ikmabc,sa,rb,qc->ikmsrq", field.coeffs, self.Ve, self.Ve, self.Ve,
        )
        w_x = np.exp(-self.q * self._phi_at_volume_nodes(potential))  # (n_x, ne)
        w_p = np.exp(self.eps_e) * self.p_sq_e  # (n_p, ne)
        return float(
            contract(
                "ikmsrq,ikmsrq,s,r,q,is,kr,ikm->",
                fe, fe, u, u, u, w_x, w_p, sp.jac,
            )
        )

    def weighted_inner(self, f: DGField, g: DGField, potential):
        """<f, g e^H> with the p^2 measure, elevated quadrature."""
        sp = self.space
        u = self.rule.weights
        fe = contract(
            "ikmabc,sa,rb,qc->ikmsrq", f.coeffs, self.Ve, self.Ve, self.Ve,
        )
        ge = contract(
            "ikmabc,sa,rb,qc->ikmsrq", g.coeffs, self.Ve, self.Ve, self.Ve,
        )
        w_x = np.exp(-self.q * self._phi_at_volume_nodes(potential))
        w_p = np.exp(self.eps_e) * self.p_sq_e
        return float(
            contract(
                "ikmsrq,ikmsrq,s,r,q,is,kr,ikm->",
                fe, ge, u, u, u, w_x, w_p, sp.jac,
            )
        )

    def jump_dissipation(self, field: DGField, potential):
        """(1/4) sum over faces of int [f]^2 |beta . n| e^H dsigma."""
        sp = self.space
        mesh = sp.mesh
        u = self.rule.weights
        c = field.coeffs
        q = self.q
        total = 0.0

        # x faces: traces over elevated (p, mu) nodes
        t_lo = contract("ikmabc,a,rb,qc->ikmrq", c, self.tr_lo, self.Ve, self.Ve)
        t_hi = contract("ikmabc,a,rb,qc->ikmrq", c, self.tr_hi, self.Ve, self.Ve)
        if self.periodic:
            # jump[i] sits on the face above cell i; the wrap face reuses phi(L)
            jump = np.roll(t_lo, -1, axis=0) - t_hi
            phi_face = np.atleast_1d(potential.phi.eval_at(mesh.x_edges[1:]))
        else:
            jump = t_lo[1:] - t_hi[:-1]
            phi_face = np.atleast_1d(potential.phi.eval_at(mesh.x_edges[1:-1]))
        speed = np.abs(self.v_e[:, :, None, None] * self.mue[None, None, :, :])
        w_pm = (
            speed
            * self.p_sq_e[:, :, None, None]
            * np.exp(self.eps_e)[:, :, None, None]
            * u[None, :, None, None]
            * u[None, None, None, :]
            * (0.5 * mesh.dp)[:, None, None, None]
            * (0.5 * mesh.dmu)[None, None, :, None]
        )
        total += contract(
            "jkmrq,krmq,j->", jump**2, w_pm, np.exp(-q * phi_face))

        # p faces: interior only (p = 0 carries zero weight, top face excluded)
        if mesh.n_p > 1:
            t_lo = contract("ikmabc,b,sa,qc->ikmsq", c, self.tr_lo, self.Ve, self.Ve)
            t_hi = contract("ikmabc,b,sa,qc->ikmsq", c, self.tr_hi, self.Ve, self.Ve)
            jump = t_lo[:, 1:] - t_hi[:, :-1]  # face above p-cell k, k < n_p - 1
            e_abs = np.abs(potential.e_at_nodes(self.rule.nodes))  # (n_x, ne)
            face_w = (
                (mesh.p_edges[1:-1] ** 2) * np.exp(self.eps_p_edges[1:-1])
            )  # (n_p - 1,)
            phi_x = self._phi_at_volume_nodes(potential)
            w_xmu = (
                q
                * e_abs[:, None, :, None]
                * np.abs(self.mue)[None, :, None, :]
                * np.exp(-q * phi_x)[:, None, :, None]
                * u[None, None, :, None]
                * u[None, None, None, :]
                * (0.5 * mesh.dx)[:, None, None, None]
                * (0.5 * mesh.dmu)[None, :, None, None]
            )  # (n_x, n_mu, ne_s, ne_q)
            total += contract(
                "ikmsq,k,imsq->", jump**2, face_w, w_xmu)

        # mu faces: interior only (mu = +-1 carry zero geometric weight)
        if mesh.n_mu > 1:
            t_lo = contract("ikmabc,c,sa,rb->ikmsr", c, self.tr_lo, self.Ve, self.Ve)
            t_hi = contract("ikmabc,c,sa,rb->ikmsr", c, self.tr_hi, self.Ve, self.Ve)
            jump = t_lo[:, :, 1:] - t_hi[:, :, :-1]  # face above mu-cell m
            geom = 1.0 - mesh.mu_edges[1:-1] ** 2
            e_abs = np.abs(potential.e_at_nodes(self.rule.nodes))
            phi_x = self._phi_at_volume_nodes(potential)
            w_xp = (
                q
                * e_abs[:, None, :, None]
                * np.exp(-q * phi_x)[:, None, :, None]
                * (self.pe * np.exp(self.eps_e))[None, :, None, :]
                * u[None, None, :, None]
                * u[None, None, None, :]
                * (0.5 * mesh.dx)[:, None, None, None]
                * (0.5 * mesh.dp)[None, :, None, None]
            )  # (n_x, n_p, ne_s, ne_r)
            total += contract(
                "ikmsr,m,iksr->", jump**2, geom, w_xp)

        return float(0.25 * total)

    def entropy_check(self, field: DGField, rate: DGField, potential,
                      tol=1.0e-10) -> EntropyReport:
        """Semi-discrete entropy inequality <L f, f e^H> <= -dissipation."""
        lhs = self.weighted_inner(rate, field, potential)
        diss = self.jump_dissipation(field, potential)
        rhs = -diss
        norm = self.entropy_norm(field, potential)
        slack = tol * max(abs(lhs), abs(rhs), 1.0e-300)
        return EntropyReport(
            lhs=lhs,
            rhs=rhs,
            entropy_norm=norm,
            jump_dissipation=diss,
            slack=slack,
            passed=bool(lhs <= rhs + slack),
        )

    def collision_entropy_production(self, collision_op, field: DGField, potential):
        """Sigma(Q(f), f e^H) at the volume quadrature nodes."""
        sp = self.space
        f_nodes = sp.node_values(field)
        q_nodes = collision_op.q_at_nodes(field, f_nodes)
        u = sp.gl.weights
        eps = self.band.energy(sp.p_nodes)
        w_x = np.exp(-self.q * potential.phi_at_nodes(sp.gl.nodes))
        return float(
            contract(
                "ikmsrq,ikmsrq,s,r,q,is,kr,ikm->",
                q_nodes, f_nodes, u, u, u,
                w_x, np.exp(eps) * sp.p_sq, sp.jac,
            )
        )


def write_records_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(rec.row() + "\n")


def records_to_csv_text(records):
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for rec in records:
        buf.write(rec.row() + "\n")
    return buf.getvalue()


def write_snapshot(path, space: DGSpace, band, field: DGField, t, config_hash=""):
    """Cell-major dump of modal coefficients plus p^2-weighted averages."""
    mesh = space.mesh
    avg = space.cell_averages(field)
    n1 = space.n1
    mode_names = [
        f"c{a}{b}{c}" for a in range(n1) for b in range(n1) for c in range(n1)
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# t = {repr(float(t))}\n")
        fh.write(f"# degree = {space.degree}\n")
        fh.write(f"# cells = {mesh.n_x} {mesh.n_p} {mesh.n_mu}\n")
        fh.write(
            f"# domain = {repr(mesh.length)} {repr(mesh.p_max)}\n"
        )
        fh.write(
            f"# band = {band.kind} {repr(band.m_star)} {repr(band.alpha_k)}\n"
        )
        fh.write(f"# config_sha256 = {config_hash or 'none'}\n")
        fh.write("i,k,m,cell_average," + ",".join(mode_names) + "\n")
        for i in range(mesh.n_x):
            for k in range(mesh.n_p):
                for m in range(mesh.n_mu):
                    mods = field.coeffs[i, k, m].reshape(-1)
                    row = [str(i), str(k), str(m), repr(float(avg[i, k, m]))]
                    row.extend(repr(float(v)) for v in mods)
                    fh.write(",".join(row) + "\n")


def read_snapshot(path):
    """Parse a snapshot back into (coeffs, meta).  Inverse of write_snapshot."""
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition(" = ")
                meta[key.strip()] = value.strip()
            elif line.startswith("i,"):
                continue
            else:
                rows.append([float(tok) for tok in line.split(",")])
    n_x, n_p, n_mu = (int(v) for v in meta["cells"].split())
    degree = int(meta["degree"])
    n1 = degree + 1
    coeffs = np.zeros((n_x, n_p, n_mu, n1, n1, n1))
    for row in rows:
        i, k, m = int(row[0]), int(row[1]), int(row[2])
        coeffs[i, k, m] = np.array(row[4:]).reshape(n1, n1, n1)
    meta["t"] = float(meta["t"])
    return DGField(degree, coeffs), meta
