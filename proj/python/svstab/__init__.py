"""Steady states, Lyapunov certificates and IMEX simulation of the linearized
viscous Saint-Venant equations."""

from ._core import (
    AsymptoticsReport,
    BoundaryCoeffs,
    CoefficientIntervals,
    Grid,
    LinearizedSystem,
    LyapunovWeights,
    OmegaExitError,
    PhysicalParams,
    SimulationConfig,
    SimulationDivergedError,
    SimulationTrace,
    SpectrumReport,
    StabilityFlags,
    StabilityReport,
    StateVector,
    SteadyState,
    apply_operator,
    build_linear_system,
    build_weights,
    check_assumption_nearcritical,
    check_stability,
    check_subcritical,
    coefficient_intervals,
    evaluate_W,
    friction,
    friction_tilde,
    imex_step,
    l2_norm,
    lyapunov_monotonicity,
    simulate,
    solve_steady,
    spectrum,
    verify_asymptotics,
)

__all__ = [
    "AsymptoticsReport",
    "BoundaryCoeffs",
    "CoefficientIntervals",
    "Grid",
    "LinearizedSystem",
    "LyapunovWeights",
    "OmegaExitError",
    "PhysicalParams",
    "SimulationConfig",
    "SimulationDivergedError",
    "SimulationTrace",
    "SpectrumReport",
    "StabilityFlags",
    "StabilityReport",
    "StateVector",
    "SteadyState",
    "apply_operator",
    "build_linear_system",
    "build_weights",
    "check_assumption_nearcritical",
    "check_stability",
    "check_subcritical",
    "coefficient_intervals",
    "evaluate_W",
    "friction",
    "friction_tilde",
    "imex_step",
    "l2_norm",
    "lyapunov_monotonicity",
    "simulate",
    "solve_steady",
    "spectrum",
    "verify_asymptotics",
]

__version__ = "0.1.0"
