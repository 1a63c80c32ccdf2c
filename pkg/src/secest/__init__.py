"""Secure state estimation for linear systems under sparse sensor attacks."""

from .attacks import AttackKind, AttackModel, gps_spoof_attack, mitm_attack
from .decoder import (
    AttackEstimate,
    CorrectabilityReport,
    DecodeResult,
    MeasurementWindow,
    SolverConfig,
    check_q_correctable,
    correctability_report,
    decode,
    eigen_supports,
    max_correctable_errors,
    min_window_length,
    min_window_length_exhaustive,
    propagate_state,
)
from .exceptions import (
    ConfigError,
    DimensionError,
    MaxTriesExceeded,
    NotCorrectable,
    PlacementError,
    RiccatiNotConverged,
    SecestError,
    SingularInnovation,
    UnobservableSystem,
)
from .fusion import FusionEstimator, Mode
from .kalman import KalmanState
from .l1 import L1Problem, L1Solution, Status, solve_l1_equality
from .lti import LtiSystem, build_observability, decoder_matrices, load_system, save_system
from .quadrotor import (
    FeedbackDesign,
    MeasurementSelection,
    QuadrotorParams,
    build_quadrotor,
    design_secure_feedback,
    lqr_gain,
    place_poles,
)
from .scenario import RunReport, ScenarioConfig, emit_outputs, run_scenario

__version__ = "0.1.0"
