"""Relative-only lateral state estimation and formation control for UAV swarms.

The package simulates swarms whose agents lose absolute localization and
keep station using noisy relative-position detections of their neighbors
plus their own IMU tilt. Each agent runs the same stack: a bank of
per-neighbor Kalman filters, a fixed-radius circle fit that places its
floating control frame, a focal-state filter fusing frame fixes with
tilt-derived acceleration, and velocity feedback toward the frame origin.
"""

from .analysis import (
    AneesReport,
    anees_bounds,
    anees_series,
    build_combined_system,
    chi_square_quantile,
    metric_drift_velocity,
    metric_neighbor_distance,
    nees,
    observability_rank,
    unobservable_basis_check,
)
from .config import ScenarioConfig, load_config, parse_config_text, serialize_config
from .consistency import focal_consistency_batch
from .control import ControlParams, compute_velocity_command, select_neighborhood
from .core import Belief, Pose2, Rot2, Vec2, numerical_rank, rotate_body_to_stable
from .floating_frame import (
    DegenerateGeometryError,
    FrameEstimate,
    FrameParams,
    NoCircleError,
    estimate_frame,
    solve_center_general,
    solve_center_one,
    solve_center_two,
)
from .focal import (
    FocalBelief,
    FocalParams,
    ImuSample,
    correct_focal_acceleration,
    correct_focal_position,
    predict_focal,
    tilt_to_acceleration,
)
from .sim import SimLog, run_scenario, summarize_log
from .surroundings import NeighborTrack, SurroundingsParams, TrackBank, correct_track, predict_track

__version__ = "0.1.0"
