"""Per-neighbor linear Kalman filter bank in the focal UAV's stable frame.

Every observed UAV gets an independent 6-state filter (position, velocity,
acceleration, each planar) driven by a constant-acceleration model with no
control input. Detections arrive as body-frame relative positions and are
rotated into the stable frame before correction. Tracks are created on
first detection and dropped once unseen for longer than ``stale_timeout``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import Belief, Rot2, Vec2, kf_correct, kf_predict, rotate_body_to_stable

STATE_DIM = 6

# position-selecting measurement matrix
H_POSITION = np.hstack([np.eye(2), np.zeros((2, 4))])

# 99% chi-square ellipse for a 2D innovation, used by the optional gate
_GATE_THRESHOLD = -2.0 * math.log(1.0 - 0.99)


@dataclass
class SurroundingsParams:
    """Noise and lifecycle settings for the neighbor filter bank.

    ``process_noise`` and ``meas_noise`` are per-step covariances at the
    detection rate. New tracks start with the measurement noise on the
    position block and ``init_vel_var`` / ``init_acc_var`` on the rest.
    """

    process_noise: np.ndarray = field(
        default_factory=lambda: np.diag([1e-3, 1e-3, 1e-2, 1e-2, 1e-1, 1e-1])
    )
    meas_noise: np.ndarray = field(default_factory=lambda: 0.1 * np.eye(2))
    stale_timeout: float = 2.0
    init_vel_var: float = 1.0
    init_acc_var: float = 1.0
    gate_enabled: bool = False


@dataclass(frozen=True)
class NeighborTrack:
    """One tracked neighbor: id, 6-state belief, and lifecycle stamps."""

    uav_id: int
    belief: Belief
    last_seen: float
    created_at: float

    def position(self) -> Vec2:
        return Vec2(self.belief.mean[0], self.belief.mean[1])

    def velocity(self) -> Vec2:
        return Vec2(self.belief.mean[2], self.belief.mean[3])


@lru_cache(maxsize=64)
def constant_accel_transition(dt: float) -> np.ndarray:
    """Block transition [I, I dt, I dt^2/2; 0, I, I dt; 0, 0, I]."""
    F = np.eye(STATE_DIM)
    F[0, 2] = F[1, 3] = F[2, 4] = F[3, 5] = dt
    F[0, 4] = F[1, 5] = 0.5 * dt * dt
    return F


def predict_track(track: NeighborTrack, dt: float, params: SurroundingsParams) -> NeighborTrack:
    """Propagate a track by dt seconds under the constant-acceleration model."""
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"prediction step must be positive and finite, got {dt!r}")
    F = constant_accel_transition(dt)
    belief = kf_predict(track.belief, F, params.process_noise)
    return NeighborTrack(track.uav_id, belief, track.last_seen, track.created_at)


def correct_track(track: NeighborTrack, z: Vec2, params: SurroundingsParams) -> NeighborTrack:
    """Fuse a stable-frame position measurement into a track."""
    belief = kf_correct(track.belief, z.as_array(), H_POSITION, params.meas_noise)
    return NeighborTrack(track.uav_id, belief, track.last_seen, track.created_at)


def _new_track(uav_id: int, z: Vec2, t: float, params: SurroundingsParams) -> NeighborTrack:
    mean = np.concatenate([z.as_array(), np.zeros(4)])
    cov = np.zeros((STATE_DIM, STATE_DIM))
    cov[:2, :2] = params.meas_noise
    cov[2, 2] = cov[3, 3] = params.init_vel_var
    cov[4, 4] = cov[5, 5] = params.init_acc_var
    return NeighborTrack(uav_id, Belief(mean, cov), last_seen=t, created_at=t)


class TrackBank:
    """All currently tracked neighbors of one focal UAV, keyed by id.

    Single-owner mutable structure: one bank per focal UAV, operations take
    it exclusively. Banks of different UAVs share nothing.
    """

    def __init__(self, params: SurroundingsParams):
        self.params = params
        self.tracks: dict[int, NeighborTrack] = {}
        self.dropped_out_of_order = 0
        self.gated = 0

    def __len__(self) -> int:
        return len(self.tracks)

    def ingest_detection(self, uav_id: int, z_body: Vec2, heading: float, t: float) -> None:
        """Rotate a body-frame detection into the stable frame and fuse it.

        Unknown ids create a fresh track; known ids are predicted to t and
        corrected. Detections older than the track's last update are dropped
        (counted in ``dropped_out_of_order``), not reordered.
        """
        if not math.isfinite(heading) or not math.isfinite(t):
            raise ValueError("detection heading and time must be finite")
        z = rotate_body_to_stable(z_body, Rot2(heading))
        track = self.tracks.get(uav_id)
        if track is None:
            self.tracks[uav_id] = _new_track(uav_id, z, t, self.params)
            return
        if t < track.last_seen:
            self.dropped_out_of_order += 1
            return
        if t > track.last_seen:
            track = predict_track(track, t - track.last_seen, self.params)
        if self.params.gate_enabled and self._gate_rejects(track, z):
            self.gated += 1
            return
        track = correct_track(track, z, self.params)
        self.tracks[uav_id] = NeighborTrack(uav_id, track.belief, t, track.created_at)

    def _gate_rejects(self, track: NeighborTrack, z: Vec2) -> bool:
        innovation = z.as_array() - H_POSITION @ track.belief.mean
        S = H_POSITION @ track.belief.cov @ H_POSITION.T + self.params.meas_noise
        d2 = innovation @ np.linalg.solve(S, innovation)
        return d2 > _GATE_THRESHOLD

    def prune_stale(self, t: float) -> None:
        """Remove every track unseen for longer than stale_timeout."""
        timeout = self.params.stale_timeout
        self.tracks = {i: tr for i, tr in self.tracks.items() if t - tr.last_seen <= timeout}

    def all_tracks(self) -> list[NeighborTrack]:
        """Tracks in ascending id order (deterministic iteration)."""
        return [self.tracks[i] for i in sorted(self.tracks)]
