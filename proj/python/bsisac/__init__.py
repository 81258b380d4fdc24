"""Backscatter integrated sensing and communication toolbox.

Thin Python face of the C++ core: scene geometry and bistatic channel
construction, closed-form estimation bounds, sum-rate evaluation, the
bound-minimizing covariance design, and the Monte-Carlo engine.
"""

from ._core import (  # noqa: F401
    ArrayConfig,
    BackscatterDevice,
    BdGeometry,
    CorrelationReport,
    CrbReport,
    MseReport,
    Position,
    PositionFix,
    ProbeResult,
    PulseConstants,
    Scenario,
    SimulationRun,
    Solution,
    SolveStatus,
    SolverDiagnostics,
    SolverOptions,
    TradeoffPoint,
    crb_report,
    feasibility_probe,
    locate_bd,
    preset,
    pulse_constants,
    run_cli,
    sample_excitation,
    scene_geometry,
    solve,
    steering_rx,
    steering_tx,
    sum_rate,
    sweep,
    mse_vs_crb,
    validate_lemma1,
)

__all__ = [
    "ArrayConfig",
    "BackscatterDevice",
    "BdGeometry",
    "CorrelationReport",
    "CrbReport",
    "MseReport",
    "Position",
    "PositionFix",
    "ProbeResult",
    "PulseConstants",
    "Scenario",
    "SimulationRun",
    "Solution",
    "SolveStatus",
    "SolverDiagnostics",
    "SolverOptions",
    "TradeoffPoint",
    "crb_report",
    "feasibility_probe",
    "locate_bd",
    "preset",
    "pulse_constants",
    "run_cli",
    "sample_excitation",
    "scene_geometry",
    "solve",
    "steering_rx",
    "steering_tx",
    "sum_rate",
    "sweep",
    "mse_vs_crb",
    "validate_lemma1",
]

__version__ = "0.1.0"
