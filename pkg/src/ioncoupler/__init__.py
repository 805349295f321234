"""Tunable spin-spin coupling between ions in separate potential wells.

Layered model of a two-ion, two-well system: well geometry and normal modes
(`wells`), spin algebra (`spinops`), dressed-frame gate analytics
(`dressed`), exact truncated-space propagation with noise Monte-Carlo
(`propagator`), fluorescence-histogram inference (`detection`), and scripted
experiment scenarios with reporting (`harness`, `plots`, `cli`).
"""

from .config import (
    CONFIG_VERSION,
    default_document,
    load_document,
    resolved_document,
    scenario_config,
)
from .constants import TWO_PI, hz, rad_per_s
from .detection import (
    CountDistribution,
    CountHistogram,
    InferredProbabilities,
    ProbabilityEstimator,
    bootstrap_errors,
    calibration_scan,
    fit_estimators,
    infer_probabilities,
    phase_offset_correct,
    prep_error_bias,
    probability_pipeline,
    ramsey_populations,
    synthesize_histogram,
)
from .dressed import (
    DriveConfig,
    DriveSegment,
    GateSchedule,
    SpinPair,
    displacement_rate,
    drive_from_modes,
    effective_kappa,
    gate_schedule,
    lamb_dicke_eta,
    loop_duration,
    loop_integrals,
    loop_phase,
    two_loop_schedule,
)
from .errors import (
    ClosureError,
    ConfigError,
    ConsistencyError,
    DomainError,
    EngineError,
    FitError,
    IonCouplerError,
    LeakageError,
    ParameterError,
)
from .harness import (
    ParityFit,
    ScanResult,
    ScenarioConfig,
    SweepSpec,
    calibrated_noise_budget,
    default_config,
    find_peaks,
    fit_parity,
    run_scenario,
)
from .plots import render_scan, render_scan_bytes
from .propagator import (
    GateRunResult,
    NoiseConfig,
    QuantumState,
    build_hamiltonian,
    evolve,
    evolve_exact,
    fidelity,
    run_two_loop_gate,
    spin_motion_entropy,
)
from .selftest import run_selftest
from .wells import (
    NormalModes,
    WellPair,
    beryllium_pair,
    exchange_rate,
    exchange_time,
    modes_from_parameters,
    normal_modes,
    spacing_for_exchange_rate,
)

__version__ = "0.1.0"

__all__ = [
    "TWO_PI",
    "hz",
    "rad_per_s",
    "CONFIG_VERSION",
    "default_document",
    "load_document",
    "resolved_document",
    "scenario_config",
    "CountDistribution",
    "CountHistogram",
    "InferredProbabilities",
    "ProbabilityEstimator",
    "bootstrap_errors",
    "calibration_scan",
    "fit_estimators",
    "infer_probabilities",
    "phase_offset_correct",
    "prep_error_bias",
    "probability_pipeline",
    "ramsey_populations",
    "synthesize_histogram",
    "ParityFit",
    "ScanResult",
    "ScenarioConfig",
    "SweepSpec",
    "calibrated_noise_budget",
    "default_config",
    "find_peaks",
    "fit_parity",
    "run_scenario",
    "render_scan",
    "render_scan_bytes",
    "run_selftest",
    "DriveConfig",
    "DriveSegment",
    "GateSchedule",
    "SpinPair",
    "displacement_rate",
    "drive_from_modes",
    "effective_kappa",
    "gate_schedule",
    "lamb_dicke_eta",
    "loop_duration",
    "loop_integrals",
    "loop_phase",
    "two_loop_schedule",
    "ClosureError",
    "ConfigError",
    "ConsistencyError",
    "DomainError",
    "EngineError",
    "FitError",
    "IonCouplerError",
    "LeakageError",
    "ParameterError",
    "GateRunResult",
    "NoiseConfig",
    "QuantumState",
    "build_hamiltonian",
    "evolve",
    "evolve_exact",
    "fidelity",
    "run_two_loop_gate",
    "spin_motion_entropy",
    "NormalModes",
    "WellPair",
    "beryllium_pair",
    "exchange_rate",
    "exchange_time",
    "modes_from_parameters",
    "normal_modes",
    "spacing_for_exchange_rate",
    "__version__",
]
