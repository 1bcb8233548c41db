"""Non-Hermitian quantum-walk toolkit: chiral Bell-state switching by
dynamically encircling a spectral exceptional point.

Core layers: one-step operators (walk), eigensystem and quasienergy sheets
(spectrum), Bell-state metrics (metrics), loop schedules and evolution
engines (loops), tomography simulation (tomo), optical-element compilation
(optics), batch drivers and the CLI (harness, cli).
"""
from .errors import (
    ConfigError,
    ConventionMismatch,
    DomainError,
    EploopError,
    IllConditioned,
    NegativeEigenvalue,
    NoBracket,
    NotHermitian,
    NumericalGuardError,
    SingularMatrix,
    TooCloseToEP,
)
from .harness import (
    CaseStats,
    DisorderConfig,
    DisorderSummary,
    RunConfig,
    disorder_run,
    report_dict,
    reproduce_figure,
    thread_count,
)
from .loops import (
    CHIRAL_TARGETS,
    DIRECTIONS,
    EvolutionReport,
    LoopSchedule,
    OptimizeResult,
    SheetTrace,
    StepRecord,
    bell_eigenstate,
    control_drift,
    equal_phases,
    evolve,
    evolve_full,
    evolve_simplified,
    expected_output,
    loop1_schedule,
    loop2_schedule,
    min_case_fidelity,
    optimize_schedule,
    schedule_from_phases,
    sheet_trace,
)
from .metrics import (
    BELL_LABELS,
    Classification,
    bell_index,
    bell_state,
    classify,
    density_matrix,
    fidelity,
    fidelity_pure,
    similarity,
)
from .optics import (
    ElementSequence,
    OpticalElement,
    compile_control_endpoint,
    compile_CN,
    compile_gain_loss,
    compile_gain_loss_inverse,
    compile_phase_shift,
    compile_rotation,
    compile_symmetry_break,
    compile_walk_step,
    gamma_from_transmittance,
    prepared_state,
    sequence_text,
    start_params,
    transmittance_from_gamma,
)
from .spectrum import (
    EigenSystem,
    EpLocation,
    eigensystem,
    find_ep,
    point_in_polygon,
    quasienergy,
    riemann_surface,
    surface_csv,
)
from .tomo import (
    CountsTable,
    TomoConfig,
    bootstrap_error,
    counts_csv,
    counts_from_csv,
    measurement_matrix,
    reconstruct,
    reconstruct_from_frequencies,
    simulate_counts,
)
from .walk import (
    DCoefficients,
    WalkParams,
    control_operator,
    d_coefficients,
    eta_pair,
    gain_loss,
    gain_loss_inverse,
    phase_shift,
    rotation,
    symmetry_break,
    u_step,
    walk_operator_closed,
    walk_operator_product,
)

__version__ = "0.1.0"

__all__ = [
    "BELL_LABELS",
    "CHIRAL_TARGETS",
    "CaseStats",
    "Classification",
    "ConfigError",
    "ConventionMismatch",
    "CountsTable",
    "DCoefficients",
    "DIRECTIONS",
    "DisorderConfig",
    "DisorderSummary",
    "DomainError",
    "EigenSystem",
    "ElementSequence",
    "EpLocation",
    "EploopError",
    "EvolutionReport",
    "IllConditioned",
    "LoopSchedule",
    "NegativeEigenvalue",
    "NoBracket",
    "NotHermitian",
    "NumericalGuardError",
    "OptimizeResult",
    "OpticalElement",
    "RunConfig",
    "SheetTrace",
    "SingularMatrix",
    "StepRecord",
    "TomoConfig",
    "TooCloseToEP",
    "WalkParams",
    "bell_eigenstate",
    "bell_index",
    "bell_state",
    "bootstrap_error",
    "classify",
    "compile_CN",
    "compile_control_endpoint",
    "compile_gain_loss",
    "compile_gain_loss_inverse",
    "compile_phase_shift",
    "compile_rotation",
    "compile_symmetry_break",
    "compile_walk_step",
    "control_drift",
    "control_operator",
    "counts_csv",
    "counts_from_csv",
    "d_coefficients",
    "density_matrix",
    "disorder_run",
    "eigensystem",
    "equal_phases",
    "eta_pair",
    "evolve",
    "evolve_full",
    "evolve_simplified",
    "expected_output",
    "fidelity",
    "fidelity_pure",
    "find_ep",
    "gain_loss",
    "gain_loss_inverse",
    "gamma_from_transmittance",
    "loop1_schedule",
    "loop2_schedule",
    "measurement_matrix",
    "min_case_fidelity",
    "optimize_schedule",
    "phase_shift",
    "point_in_polygon",
    "prepared_state",
    "quasienergy",
    "reconstruct",
    "reconstruct_from_frequencies",
    "report_dict",
    "reproduce_figure",
    "riemann_surface",
    "rotation",
    "schedule_from_phases",
    "sequence_text",
    "sheet_trace",
    "similarity",
    "simulate_counts",
    "start_params",
    "surface_csv",
    "symmetry_break",
    "thread_count",
    "transmittance_from_gamma",
    "u_step",
    "walk_operator_closed",
    "walk_operator_product",
]
