"""Variational integrators for mechanical systems with fractional damping."""

from .analysis import (
    ConvergenceReport,
    compare,
    convergence_summary,
    energy_series,
    fit_slope,
    global_error,
    reverse,
    write_convergence_csv,
)
from .fracops import (
    Grid,
    GrunwaldTable,
    delta_minus,
    delta_minus_squared,
    delta_plus,
    delta_plus_squared,
    grunwald_coeffs,
    operator_matrix,
)
from .integrators import (
    FractionalOrderWarning,
    HamiltonianState,
    IntegratorConfig,
    NewtonDiverged,
    Trajectory,
    euler_explicit_run,
    euler_implicit_run,
    fvi_init,
    fvi_run,
    ham_fvi_run,
    hamiltonian_state,
    lda_run,
    newton_solve,
    reversal_residual,
    vi_run,
)
from .models import (
    CallablePotential,
    ExternalForce,
    MechModel,
    Quadratic,
    energy,
    force_at,
    quadratic_model,
)
from .oracles import (
    OscillatorParams,
    SingularMatrix,
    exact_oscillator,
    exact_oscillator_forced,
    exact_trajectory,
    matrix_oracle_solve,
    matrix_oracle_system,
    solve_dense,
)

__version__ = "0.1.0"

__all__ = [
    "CallablePotential",
    "ConvergenceReport",
    "ExternalForce",
    "FractionalOrderWarning",
    "Grid",
    "GrunwaldTable",
    "HamiltonianState",
    "IntegratorConfig",
    "MechModel",
    "NewtonDiverged",
    "OscillatorParams",
    "Quadratic",
    "SingularMatrix",
    "Trajectory",
    "compare",
    "convergence_summary",
    "delta_minus",
    "delta_minus_squared",
    "delta_plus",
    "delta_plus_squared",
    "energy",
    "energy_series",
    "euler_explicit_run",
    "euler_implicit_run",
    "exact_oscillator",
    "exact_oscillator_forced",
    "exact_trajectory",
    "fit_slope",
    "force_at",
    "fvi_init",
    "fvi_run",
    "global_error",
    "grunwald_coeffs",
    "ham_fvi_run",
    "hamiltonian_state",
    "lda_run",
    "matrix_oracle_solve",
    "matrix_oracle_system",
    "newton_solve",
    "operator_matrix",
    "quadratic_model",
    "reversal_residual",
    "reverse",
    "solve_dense",
    "vi_run",
    "write_convergence_csv",
]
