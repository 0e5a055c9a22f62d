"""Time integration: forward Euler and SSP Runge-Kutta drivers.

Every stage is a forward-Euler substep followed by the positivity
limiter, and the SSP combinations are convex, so per-stage positivity
carries to the full step.  The electric field refreshes before every
stage (self-consistent mode) or stays pinned to the initial solve
(frozen mode).  Each accepted step emits one diagnostics record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import Diagnostics, StepRecord
from .errors import CompatibilityError, StepFailure
from .field import DGField, DGSpace
from .poisson import compute_current, compute_density, solve_dirichlet, solve_periodic
from .positivity import ControlPointSet, compute_budget, limit_nonnegative

_STAGE_MASS_WEIGHTS = {
    "euler": (1.0,),
    "ssp2": (0.5, 0.5),
    "ssp3": (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0),
}


@dataclass
class RunResult:
    field: DGField
    potential: object
    records: list
    t: float
    steps: int
    flattened_at: int | None  # record index where the current collapsed
    j_peak: float
    status: str = "ok"
    error: str = ""


class KineticSolver:
    """Couples transport, collisions, and the field solve into steps."""

    def __init__(
        self,
        space: DGSpace,
        band,
        transport,
        collision=None,
        *,
        doping,
        q=1.0,
        eps_perm=1.0,
        phi_applied=0.0,
        bc="periodic",
        poisson_refresh="per-stage",
        rk="ssp2",
        cfl_safety=0.9,
        alpha="auto",
        s="auto",
        limiter=True,
        compat_tol=1.0e-10,
    ):
        if bc not in ("periodic", "dirichlet"):
            raise ValueError(f"unsupported boundary condition {bc!r}")
        if poisson_refresh not in ("per-stage", "frozen"):
            raise ValueError(f"unsupported refresh policy {poisson_refresh!r}")
        if rk not in _STAGE_MASS_WEIGHTS:
            raise ValueError(f"unsupported integrator {rk!r}")
        self.space = space
        self.band = band
        self.transport = transport
        self.collision = collision if (collision is not None
                                       and collision.params.is_active) else None
        self.doping = doping
        self.q = float(q)
        self.eps_perm = float(eps_perm)
        self.phi_applied = float(phi_applied)
        self.bc = bc
        self.poisson_refresh = poisson_refresh
        self.rk = rk
        self.cfl_safety = float(cfl_safety)
        self.alpha = alpha
        self.s = s
        self.limiter = bool(limiter)
        self.compat_tol = float(compat_tol)
        if self.collision is not None:
            self.control = ControlPointSet(space, self.collision.table,
                                           self.collision.gain_weight)
        else:
            self.control = ControlPointSet(space)
        self.diagnostics = Diagnostics(space, band, q=q, periodic=(bc == "periodic"))
        self._frozen_potential = None

    # field solve ------------------------------------------------------------

    def solve_potential(self, field: DGField):
        rho = compute_density(self.space, field)
        if self.bc == "periodic":
            # re-center the background on the instantaneous charge: only the
            # difference N - rho is observable periodically, and the energy
            # cutoff slowly bleeds charge that would otherwise break the
            # compatibility condition mid-run
            edges = self.space.mesh.x_edges
            length = float(edges[-1] - edges[0])
            shift = (rho.integral() - self.doping.integral()) / length
            return solve_periodic(rho, self.doping + shift, self.q,
                                  self.eps_perm, tol_compat=self.compat_tol)
        return solve_dirichlet(rho, self.doping, self.q, self.eps_perm,
                               self.phi_applied)

    def potential_for(self, field: DGField):
        """Potential per the refresh policy; frozen mode solves once."""
        if self.poisson_refresh == "frozen":
            if self._frozen_potential is None:
                self._frozen_potential = self.solve_potential(field)
            return self._frozen_potential
        return self.solve_potential(field)

    # right-hand side ----------------------------------------------------------

    def rate(self, field: DGField, potential) -> DGField:
        r = self.transport.rhs(field, potential)
        if self.collision is not None:
            r = DGField(r.degree, r.coeffs + self.collision.rhs(field).coeffs)
        return r

    def _euler_stage(self, field: DGField, potential, dt):
        """One Euler substep plus limiter: returns (field, activations, mass_rate)."""
        rhs = self.rate(field, potential)
        if not np.isfinite(rhs.coeffs).all():
            raise StepFailure("non-finite right-hand side")
        mass_rate = (self.collision.mass_rate(field)
                     if self.collision is not None else 0.0)
        out = DGField(field.degree, field.coeffs + dt * rhs.coeffs)
        count = 0
        if self.limiter:
            out, count = limit_nonnegative(self.space, out, self.control)
        return out, count, mass_rate

    # integrators --------------------------------------------------------------

    def euler_step(self, field: DGField, dt, potential=None):
        pot = potential if potential is not None else self.potential_for(field)
        out, count, mr = self._euler_stage(field, pot, dt)
        leak = -dt * mr
        return out, count, leak

    def ssp_rk2(self, field: DGField, dt, potential=None):
        pot0 = potential if potential is not None else self.potential_for(field)
        u1, c1, m0 = self._euler_stage(field, pot0, dt)
        pot1 = self.potential_for(u1)
        rhs1 = self.rate(u1, pot1)
        if not np.isfinite(rhs1.coeffs).all():
            raise StepFailure("non-finite right-hand side")
        m1 = self.collision.mass_rate(u1) if self.collision is not None else 0.0
        comb = 0.5 * field.coeffs + 0.5 * (u1.coeffs + dt * rhs1.coeffs)
        out = DGField(field.degree, comb)
        c2 = 0
        if self.limiter:
            out, c2 = limit_nonnegative(self.space, out, self.control)
        leak = -dt * (0.5 * m0 + 0.5 * m1)
        return out, c1 + c2, leak

    def ssp_rk3(self, field: DGField, dt, potential=None):
        pot0 = potential if potential is not None else self.potential_for(field)
        u1, c1, m0 = self._euler_stage(field, pot0, dt)

        pot1 = self.potential_for(u1)
        rhs1 = self.rate(u1, pot1)
        if not np.isfinite(rhs1.coeffs).all():
            raise StepFailure("non-finite right-hand side")
        m1 = self.collision.mass_rate(u1) if self.collision is not None else 0.0
        u2 = DGField(
            field.degree,
            0.75 * field.coeffs + 0.25 * (u1.coeffs + dt * rhs1.coeffs),
        )
        c2 = 0
        if self.limiter:
            u2, c2 = limit_nonnegative(self.space, u2, self.control)

        pot2 = self.potential_for(u2)
        rhs2 = self.rate(u2, pot2)
        if not np.isfinite(rhs2.coeffs).all():
            raise StepFailure("non-finite right-hand side")
        m2 = self.collision.mass_rate(u2) if self.collision is not None else 0.0
        out = DGField(
            field.degree,
            field.coeffs / 3.0 + (2.0 / 3.0) * (u2.coeffs + dt * rhs2.coeffs),
        )
        c3 = 0
        if self.limiter:
            out, c3 = limit_nonnegative(self.space, out, self.control)

        leak = -dt * (m0 / 6.0 + m1 / 6.0 + 2.0 * m2 / 3.0)
        return out, c1 + c2 + c3, leak

    def advance(self, field: DGField, dt, potential=None):
        if self.rk == "euler":
            return self.euler_step(field, dt, potential)
        if self.rk == "ssp2":
            return self.ssp_rk2(field, dt, potential)
        return self.ssp_rk3(field, dt, potential)

    # step-size certificate ------------------------------------------------------

    def budget(self, field: DGField, potential):
        return compute_budget(
            self.space,
            self.band,
            potential,
            field,
            collision_op=self.collision,
            q=self.q,
            alpha=self.alpha,
            s=self.s,
            safety=self.cfl_safety,
        )

    # diagnostics ----------------------------------------------------------------

    def total_mass(self, field: DGField):
        """Physical mass including the azimuthal 2 pi factor."""
        return 2.0 * np.pi * self.space.mass(field)

    def semi_discrete_entropy_check(self, field: DGField, potential=None):
        """Entropy-rate inequality report; None for non-periodic runs."""
        if self.bc != "periodic":
            import warnings

            warnings.warn("entropy inequality check skipped: periodic BC required")
            return None
        pot = potential if potential is not None else self.potential_for(field)
        rate = self.rate(field, pot)
        return self.diagnostics.entropy_check(field, rate, pot)

    def record(self, field: DGField, potential, t, dt, binding, limiter_count, leak):
        current = compute_current(self.space, self.band, field)
        j_min, j_max = current.minmax()
        return StepRecord(
            t=float(t),
            dt=float(dt),
            binding=binding,
            mass=self.total_mass(field),
            entropy_norm=self.diagnostics.entropy_norm(field, potential),
            jump_dissipation=self.diagnostics.jump_dissipation(field, potential),
            J_min=float(j_min),
            J_max=float(j_max),
            min_control_value=self.control.global_min(field),
            limiter_count=int(limiter_count),
            chi_mass_leak=float(leak),
        )

    # main loop --------------------------------------------------------------------

    def run(self, field: DGField, t_final=None, max_steps=1000, on_step=None,
            flatten_delta=1.0e-6):
        """March until t_final or max_steps, recording one row per step.

        on_step(index, record, field, potential) may return True to stop.
        flattened_at marks the first record where the spatial spread of
        the current J drops below flatten_delta times the running peak
        of |J|.
        """
        if self.limiter:
            field, _ = limit_nonnegative(self.space, field, self.control)
        potential = self.potential_for(field)
        records = []
        t = 0.0
        j_peak = 0.0
        flattened_at = None
        status, err = "ok", ""
        steps = 0
        try:
            for n in range(int(max_steps)):
                if t_final is not None and t >= t_final - 1.0e-15 * max(1.0, t_final):
                    break
                budget = self.budget(field, potential)
                dt = budget.dt
                if t_final is not None:
                    dt = min(dt, t_final - t)
                field, limiter_count, leak = self.advance(field, dt, potential)
                t += dt
                steps += 1
                potential = self.potential_for(field)
                rec = self.record(field, potential, t, dt, budget.binding,
                                  limiter_count, leak)
                records.append(rec)
                j_abs = max(abs(rec.J_min), abs(rec.J_max))
                j_peak = max(j_peak, j_abs)
                spread = rec.J_max - rec.J_min
                if flattened_at is None and j_peak > 0.0 and \
                        spread <= flatten_delta * j_peak:
                    flattened_at = len(records) - 1
                if on_step is not None and on_step(n, rec, field, potential):
                    break
        except (StepFailure, CompatibilityError) as exc:
            # compatibility lost mid-run counts as a failed step, not a crash
            status, err = "step-failure", str(exc)
        return RunResult(
            field=field,
            potential=potential,
            records=records,
            t=t,
            steps=steps,
            flattened_at=flattened_at,
            j_peak=j_peak,
            status=status,
            error=err,
        )
