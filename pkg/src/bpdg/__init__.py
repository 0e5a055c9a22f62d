"""Deterministic discontinuous Galerkin solver for kinetic transport of
carriers in one position and two momentum coordinates, coupled to a
self-consistent electrostatic field.

The public surface: build a scenario from a config, march it with
certified positive steps, and interrogate the entropy, mass, and
positivity diagnostics the scheme guarantees.
"""

from .band import BandModel, build_band
from .collision import (
    CollisionOperator,
    ScatteringParams,
    build_shift_table,
    collision_frequency,
)
from .config import (
    SimulationConfig,
    config_hash,
    parse_config,
    parse_config_text,
    serialize_config,
)
from .curvilinear import (
    BetaKane5,
    BetaSpherical,
    divergence_numeric,
    gradient_numeric,
)
from .diagnostics import (
    CSV_COLUMNS,
    Diagnostics,
    EntropyReport,
    StepRecord,
    read_snapshot,
    records_to_csv_text,
    write_records_csv,
    write_snapshot,
)
from .errors import CompatibilityError, ConfigError, StepFailure
from .field import DGField, DGSpace
from .mesh import TensorMesh, build_mesh, gauss_legendre, gauss_lobatto
from .poisson import (
    PiecewisePoly,
    PotentialSolution,
    compute_current,
    compute_density,
    solve_dirichlet,
    solve_periodic,
    stepped_doping,
    uniform_doping,
    zero_potential,
)
from .positivity import (
    CFLBudget,
    ControlPointSet,
    collision_cfl,
    collision_cfl_split,
    compute_budget,
    equalized_simplex,
    limit_nonnegative,
    optimal_alpha,
    transport_cfl,
    transport_kernels,
)
from .runner import build_solver, initial_field, run_simulation
from .stepping import KineticSolver, RunResult
from .transport import BoundarySpec, TransportOperator
from .verification import (
    CheckResult,
    beta_checks,
    convergence_study,
    run_invariant_suite,
)

__version__ = "0.1.0"

__all__ = [
    "BandModel",
    "BetaKane5",
    "BetaSpherical",
    "BoundarySpec",
    "CFLBudget",
    "CSV_COLUMNS",
    "CheckResult",
    "CollisionOperator",
    "CompatibilityError",
    "ConfigError",
    "ControlPointSet",
    "DGField",
    "DGSpace",
    "Diagnostics",
    "EntropyReport",
    "KineticSolver",
    "PiecewisePoly",
    "PotentialSolution",
    "RunResult",
    "ScatteringParams",
    "SimulationConfig",
    "StepFailure",
    "StepRecord",
    "TensorMesh",
    "TransportOperator",
    "beta_checks",
    "build_band",
    "build_mesh",
    "build_shift_table",
    "build_solver",
    "collision_cfl",
    "collision_cfl_split",
    "collision_frequency",
    "compute_budget",
    "compute_current",
    "compute_density",
    "config_hash",
    "convergence_study",
    "divergence_numeric",
    "equalized_simplex",
    "gauss_legendre",
    "gauss_lobatto",
    "gradient_numeric",
    "initial_field",
    "limit_nonnegative",
    "optimal_alpha",
    "parse_config",
    "parse_config_text",
    "read_snapshot",
    "records_to_csv_text",
    "run_invariant_suite",
    "run_simulation",
    "serialize_config",
    "solve_dirichlet",
    "solve_periodic",
    "stepped_doping",
    "transport_cfl",
    "transport_kernels",
    "uniform_doping",
    "write_records_csv",
    "write_snapshot",
    "zero_potential",
]
