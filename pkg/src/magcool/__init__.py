"""magcool: squeezing-enhanced sideband cooling of a levitated micromagnet.

Simulates the steady states, force-noise spectra, cooling rates, phonon
occupancies, cooling dynamics and quality-factor thresholds of a hybrid
cavity-magnomechanical system in its linearized Gaussian regime, for both
the single-channel (MCM) and dual-channel interference (CMI) mechanisms.
"""

from .cooling import (
    CoolingReport,
    OccupancyTrajectory,
    ThresholdResult,
    cooling_report,
    crossing_time_seconds,
    lyapunov_dynamics,
    lyapunov_steady,
    occupancy_dynamics,
    qc_threshold,
    rates,
    steady_occupancy,
)
from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    InstabilityError,
    MagcoolError,
    MultistabilityWarning,
    ParametricThresholdError,
    RunawayError,
    SingularityError,
)
from .model import (
    DEFAULT_CONSTANTS,
    DeviceGeometry,
    Mechanism,
    PhysicalConstants,
    SystemParams,
    derive_couplings,
    drive_amplitudes,
    intracavity_squeezing,
    thermal_occupancy,
)
from .spectra import (
    CmiAmplitudes,
    SpectrumResult,
    Susceptibilities,
    cmi_amplitudes,
    engine_name,
    interference_diagnostic,
    mcm_rates,
    psd_general,
    psd_grid,
)
from .steady import (
    DriftModel,
    StabilityReport,
    SteadyState,
    assert_stable,
    build_drift,
    effective_couplings,
    solve_cmi,
    solve_mcm,
    stability_report,
)
from .sweeps import (
    OptimizationResult,
    SweepSpec,
    optimize_interference,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CmiAmplitudes",
    "ConfigError",
    "ConvergenceError",
    "CoolingReport",
    "DEFAULT_CONSTANTS",
    "DeviceGeometry",
    "DomainError",
    "DriftModel",
    "InstabilityError",
    "MagcoolError",
    "Mechanism",
    "MultistabilityWarning",
    "OccupancyTrajectory",
    "OptimizationResult",
    "ParametricThresholdError",
    "PhysicalConstants",
    "RunawayError",
    "SingularityError",
    "SpectrumResult",
    "StabilityReport",
    "SteadyState",
    "Susceptibilities",
    "SweepSpec",
    "SystemParams",
    "ThresholdResult",
    "assert_stable",
    "build_drift",
    "cmi_amplitudes",
    "cooling_report",
    "crossing_time_seconds",
    "derive_couplings",
    "drive_amplitudes",
    "effective_couplings",
    "engine_name",
    "interference_diagnostic",
    "intracavity_squeezing",
    "lyapunov_dynamics",
    "lyapunov_steady",
    "mcm_rates",
    "occupancy_dynamics",
    "optimize_interference",
    "psd_general",
    "psd_grid",
    "qc_threshold",
    "rates",
    "run_sweep",
    "solve_cmi",
    "solve_mcm",
    "stability_report",
    "steady_occupancy",
    "thermal_occupancy",
]
