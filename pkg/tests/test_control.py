import math

import numpy as np

from swa.control import ControlParams, compute_velocity_command, saturate, select_neighborhood
from swa.core import Belief, Vec2
from swa.focal import FocalBelief, focal_transition
from swa.surroundings import NeighborTrack


def focal_state(mean):
    return FocalBelief(Belief(np.asarray(mean, float), np.eye(6)), 0.0)


def track_at(x, y, uav_id):
    mean = np.array([x, y, 0, 0, 0, 0], dtype=float)
    return NeighborTrack(uav_id, Belief(mean, np.eye(6)), 0.0, 0.0)


class TestSelectNeighborhood:
    def test_range_filter(self):
        params = ControlParams(neighbor_range=20.0, neighbor_cap=5)
        tracks = [track_at(5, 0, 0), track_at(0, 8, 1), track_at(50, 0, 2)]
        out = select_neighborhood(tracks, params)
        assert [t.uav_id for t in out] == [0, 1]

    def test_cap_keeps_nearest(self):
        params = ControlParams(neighbor_range=100.0, neighbor_cap=5)
        tracks = [track_at(float(r), 0, i) for i, r in enumerate([7, 3, 9, 1, 5, 8, 2])]
        out = select_neighborhood(tracks, params)
        assert [t.uav_id for t in out] == [3, 6, 1, 4, 0]

    def test_empty_input(self):
        assert select_neighborhood([], ControlParams()) == []

    def test_tie_breaks_by_id(self):
        params = ControlParams(neighbor_cap=1)
        tracks = [track_at(0, 5, 4), track_at(5, 0, 2)]
        out = select_neighborhood(tracks, params)
        assert out[0].uav_id == 2


class TestVelocityCommand:
    def test_position_feedback_sign(self):
        params = ControlParams()
        cmd = compute_velocity_command(focal_state([2, 0, 0, 0, 0, 0]), params)
        assert abs(cmd.x - (-1.0)) < 1e-12 and cmd.y == 0.0

    def test_at_setpoint(self):
        cmd = compute_velocity_command(focal_state(np.zeros(6)), ControlParams())
        assert cmd == Vec2(0.0, 0.0)

    def test_saturation(self):
        cmd = compute_velocity_command(focal_state([100, 0, 0, 0, 0, 0]), ControlParams())
        assert abs(cmd.x - (-7.0)) < 1e-12 and cmd.y == 0.0

    def test_scale_consistency_unsaturated(self):
        params = ControlParams(v_max=1e9)
        base = compute_velocity_command(focal_state([1, 2, 0.5, -0.5, 0, 0]), params)
        doubled = compute_velocity_command(focal_state([2, 4, 1.0, -1.0, 0, 0]), params)
        assert abs(doubled.x - 2 * base.x) < 1e-12
        assert abs(doubled.y - 2 * base.y) < 1e-12

    def test_saturation_preserves_direction(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = Vec2(rng.uniform(-100, 100), rng.uniform(-100, 100))
            if v.norm() == 0.0:
                continue
            clamped = saturate(v, 7.0)
            cosine = v.dot(clamped) / (v.norm() * clamped.norm())
            assert cosine > 1.0 - 1e-12
            assert clamped.norm() <= 7.0 + 1e-12


class TestClosedLoop:
    def test_converges_from_offset_within_60s(self):
        """Noise-free loop against the damped-velocity plant: the position
        norm must fall below 0.1 m within 60 s from a 20 m offset, with a
        non-increasing envelope after the initial transient."""
        params = ControlParams()
        dt, tau = 0.01, 2.8
        F, B = focal_transition(dt, tau)
        state = np.array([20.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        norms = []
        for _ in range(6000):
            cmd = compute_velocity_command(
                FocalBelief(Belief(state, np.eye(6)), 0.0), params
            )
            state = F @ state + B @ cmd.as_array()
            norms.append(math.hypot(state[0], state[1]))
        norms = np.array(norms)
        assert norms[-1] < 0.1
        below = np.nonzero(norms < 0.1)[0][0]
        assert below * dt < 60.0
        # envelope over 5 s windows is non-increasing once the transient passed
        windows = norms[1000:].reshape(-1, 500).max(axis=1)
        assert np.all(np.diff(windows) <= 1e-9)
