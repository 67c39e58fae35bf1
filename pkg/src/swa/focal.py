"""Focal-UAV lateral state estimator.

A single input-driven linear Kalman filter over [position, velocity,
acceleration] of the focal UAV expressed in its floating control frame.
The velocity block carries an environmental damping factor
e_d = exp(-dt / tau), and the commanded velocity enters through the input
matrix scaled by (1 - e_d), so a command equal to the current velocity is
a fixed point of the model.

Two asynchronous correction channels exist, each with its own operation so
they can never be fused in one step: floating-frame position fixes (the
negated circle-fit center) and lateral accelerations derived from IMU tilt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import Belief, Rot2, Vec2, kf_correct, kf_predict
from .floating_frame import FrameEstimate
from .surroundings import constant_accel_transition

STATE_DIM = 6

H_POSITION = np.hstack([np.eye(2), np.zeros((2, 4))])
H_ACCELERATION = np.hstack([np.zeros((2, 4)), np.eye(2)])


@dataclass
class FocalParams:
    """Filter tuning for the focal estimator.

    ``process_noise`` is the per-prediction-step covariance at the base
    estimation rate. ``tilt_accel_gain`` converts tilt angle (rad) into
    lateral acceleration (m/s^2).
    """

    tau: float = 2.8
    process_noise: np.ndarray = field(
        default_factory=lambda: np.diag([5e-2, 5e-2, 5e-1, 5e-1, 5.0, 5.0])
    )
    pos_meas_noise: np.ndarray = field(default_factory=lambda: 2e-2 * np.eye(2))
    acc_meas_noise: np.ndarray = field(default_factory=lambda: 2.25 * np.eye(2))
    tilt_accel_gain: float = 6.35
    init_pos_var: float = 1.0
    init_vel_var: float = 1.0
    init_acc_var: float = 1.0


@dataclass(frozen=True)
class ImuSample:
    """Pre-filtered attitude sample: pitch/roll tilt plus known heading."""

    pitch: float
    roll: float
    heading: float
    stamp: float

    def __post_init__(self) -> None:
        if not (abs(self.pitch) < math.pi / 2 and abs(self.roll) < math.pi / 2):
            raise ValueError("tilt angles must stay below pi/2")
        if not math.isfinite(self.heading) or not math.isfinite(self.stamp):
            raise ValueError("IMU heading and stamp must be finite")


@dataclass(frozen=True)
class FocalBelief:
    """Focal state belief (dim 6) stamped with its validity time."""

    belief: Belief
    stamp: float

    def position(self) -> Vec2:
        return Vec2(self.belief.mean[0], self.belief.mean[1])

    def velocity(self) -> Vec2:
        return Vec2(self.belief.mean[2], self.belief.mean[3])

    def acceleration(self) -> Vec2:
        return Vec2(self.belief.mean[4], self.belief.mean[5])


def initial_focal_belief(params: FocalParams, stamp: float) -> FocalBelief:
    """Zero-mean start with moderate variance on every block."""
    cov = np.diag(
        [params.init_pos_var] * 2 + [params.init_vel_var] * 2 + [params.init_acc_var] * 2
    )
    return FocalBelief(Belief(np.zeros(STATE_DIM), cov), stamp)


@lru_cache(maxsize=64)
def focal_transition(dt: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Transition and input matrices of the damped-velocity model.

    F keeps the constant-acceleration couplings (I dt into position,
    I dt^2/2 from acceleration) and multiplies the velocity diagonal by
    e_d; B routes the commanded velocity into the velocity block with
    weight (1 - e_d).
    """
    e_d = math.exp(-dt / tau)
    F = np.eye(STATE_DIM)
    F[0, 2] = F[1, 3] = dt
    F[0, 4] = F[1, 5] = 0.5 * dt * dt
    F[2, 2] = F[3, 3] = e_d
    F[2, 4] = F[3, 5] = dt
    B = np.zeros((STATE_DIM, 2))
    B[2, 0] = B[3, 1] = 1.0 - e_d
    return F, B


def predict_focal(state: FocalBelief, v_desired: Vec2, dt: float, params: FocalParams) -> FocalBelief:
    """Propagate the focal belief by dt under the commanded velocity."""
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"prediction step must be positive and finite, got {dt!r}")
    F, B = focal_transition(dt, params.tau)
    belief = kf_predict(state.belief, F, params.process_noise, control=B @ v_desired.as_array())
    return FocalBelief(belief, state.stamp + dt)


def predict_dead_reckoning(state: FocalBelief, dt: float, params: FocalParams) -> FocalBelief:
    """Propagate by pure kinematic integration, no damping and no input.

    This is the standalone-baseline predictor: with relative corrections
    unavailable, the vehicle's response to commands is already contained
    in the sensed acceleration, so the state is dead-reckoned from it.
    """
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"prediction step must be positive and finite, got {dt!r}")
    belief = kf_predict(state.belief, constant_accel_transition(dt), params.process_noise)
    return FocalBelief(belief, state.stamp + dt)


def tilt_to_acceleration(imu: ImuSample, tilt_accel_gain: float) -> Vec2:
    """Map tilt into lateral acceleration: gain * R(heading) @ [pitch, roll]."""
    rotated = Rot2(imu.heading).apply(Vec2(imu.pitch, imu.roll))
    return rotated * tilt_accel_gain


def correct_focal_position(state: FocalBelief, frame: FrameEstimate, params: FocalParams) -> FocalBelief:
    """Fuse a floating-frame fix: the measured position is the negated center.

    The circle-fit center is the frame origin seen from the UAV, so the
    UAV seen from the frame origin is its negation.
    """
    z = -frame.center.as_array()
    belief = kf_correct(state.belief, z, H_POSITION, params.pos_meas_noise)
    return FocalBelief(belief, state.stamp)


def correct_focal_acceleration(state: FocalBelief, imu: ImuSample, params: FocalParams) -> FocalBelief:
    """Fuse a tilt-derived lateral acceleration measurement."""
    z = tilt_to_acceleration(imu, params.tilt_accel_gain).as_array()
    belief = kf_correct(state.belief, z, H_ACCELERATION, params.acc_meas_noise)
    return FocalBelief(belief, state.stamp)
