import math

import numpy as np
import pytest

from swa.analysis import anees_series
from swa.consistency import focal_consistency_batch
from swa.core import Belief, Vec2
from swa.floating_frame import FrameEstimate
from swa.focal import (
    FocalBelief,
    FocalParams,
    ImuSample,
    correct_focal_acceleration,
    correct_focal_position,
    initial_focal_belief,
    predict_dead_reckoning,
    predict_focal,
    tilt_to_acceleration,
)


def focal_state(mean, cov=None, stamp=0.0):
    cov = np.eye(6) if cov is None else cov
    return FocalBelief(Belief(np.asarray(mean, float), cov), stamp)


class TestPredict:
    def test_velocity_damping(self):
        params = FocalParams()
        e_d = math.exp(-0.1 / params.tau)  # independent evaluation of the damping factor
        state = focal_state([0, 0, 1, 0, 0, 0])
        out = predict_focal(state, Vec2(0, 0), 0.1, params)
        assert abs(out.belief.mean[2] - e_d) < 1e-12
        assert abs(e_d - 0.96491) < 1e-5  # frozen reference value

    def test_command_injection(self):
        params = FocalParams()
        e_d = math.exp(-0.1 / params.tau)
        state = focal_state(np.zeros(6))
        out = predict_focal(state, Vec2(1, 0), 0.1, params)
        assert abs(out.belief.mean[2] - (1.0 - e_d)) < 1e-12

    def test_command_equal_velocity_is_fixed_point(self):
        params = FocalParams()
        state = focal_state([0, 0, 0.7, -0.4, 0, 0])
        out = predict_focal(state, Vec2(0.7, -0.4), 0.1, params)
        assert np.allclose(out.belief.mean[2:4], [0.7, -0.4], atol=1e-12)

    def test_stamp_advances(self):
        out = predict_focal(focal_state(np.zeros(6), stamp=1.0), Vec2(0, 0), 0.25, FocalParams())
        assert out.stamp == 1.25

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            predict_focal(focal_state(np.zeros(6)), Vec2(0, 0), -0.1, FocalParams())

    def test_dead_reckoning_has_no_damping_or_input(self):
        params = FocalParams()
        state = focal_state([0, 0, 1, 0, 0.5, 0])
        out = predict_dead_reckoning(state, 0.1, params)
        assert abs(out.belief.mean[2] - (1.0 + 0.1 * 0.5)) < 1e-12


class TestTiltConversion:
    def test_level_heading_zero(self):
        imu = ImuSample(pitch=0.1, roll=0.0, heading=0.0, stamp=0.0)
        out = tilt_to_acceleration(imu, 6.35)
        assert abs(out.x - 0.635) < 1e-12 and abs(out.y) < 1e-12

    def test_quarter_heading(self):
        # R(pi/2) [0, 0.1] = [-0.1, 0]
        imu = ImuSample(pitch=0.0, roll=0.1, heading=math.pi / 2, stamp=0.0)
        out = tilt_to_acceleration(imu, 6.35)
        assert abs(out.x - (-0.635)) < 1e-12 and abs(out.y) < 1e-12

    def test_level_flight(self):
        imu = ImuSample(pitch=0.0, roll=0.0, heading=1.0, stamp=0.0)
        assert tilt_to_acceleration(imu, 6.35) == Vec2(0.0, 0.0)

    def test_tilt_range_enforced(self):
        with pytest.raises(ValueError):
            ImuSample(pitch=math.pi, roll=0.0, heading=0.0, stamp=0.0)


class TestCorrections:
    def test_position_measurement_is_negated_center(self):
        params = FocalParams()
        state = focal_state(np.zeros(6))
        out = correct_focal_position(state, FrameEstimate(Vec2(2, 0), 3, 1.0), params)
        assert out.belief.mean[0] < 0  # pulled toward (-2, 0)
        assert out.belief.mean[1] == 0

    def test_zero_innovation_keeps_mean(self):
        params = FocalParams()
        state = focal_state(np.zeros(6))
        out = correct_focal_position(state, FrameEstimate(Vec2(0, 0), 3, 1.0), params)
        assert np.allclose(out.belief.mean, 0.0)

    def test_uninformative_position_limit(self):
        params = FocalParams(pos_meas_noise=1e9 * np.eye(2))
        state = focal_state([1, 2, 3, 4, 5, 6])
        out = correct_focal_position(state, FrameEstimate(Vec2(50, -50), 3, 1.0), params)
        assert np.allclose(out.belief.mean, state.belief.mean, atol=1e-6)

    def test_acceleration_gain(self):
        # scalar gain 1 / (1 + 2.25) on the acceleration block
        params = FocalParams()
        state = focal_state(np.zeros(6))
        imu = ImuSample(pitch=0.1, roll=0.0, heading=0.0, stamp=0.0)
        out = correct_focal_acceleration(state, imu, params)
        expected = 0.635 / (1.0 + 2.25)
        assert abs(out.belief.mean[4] - expected) < 1e-12
        assert np.allclose(out.belief.mean[:4], 0.0)

    def test_level_imu_keeps_zero_acceleration(self):
        params = FocalParams()
        state = focal_state(np.zeros(6))
        imu = ImuSample(pitch=0.0, roll=0.0, heading=0.3, stamp=0.0)
        out = correct_focal_acceleration(state, imu, params)
        assert np.allclose(out.belief.mean, 0.0)

    def test_channels_touch_disjoint_blocks(self):
        # position and acceleration corrections exist as separate operations;
        # a single correction never mixes the two measurement rows
        from swa.focal import H_ACCELERATION, H_POSITION

        assert np.count_nonzero(H_POSITION[:, 4:]) == 0
        assert np.count_nonzero(H_ACCELERATION[:, :4]) == 0


class TestDeterminismAndBias:
    def test_identical_event_sequence_bit_identical(self):
        params = FocalParams()

        def run():
            state = initial_focal_belief(params, 0.0)
            for k in range(1, 201):
                state = predict_focal(state, Vec2(0.3, -0.2), 0.01, params)
                if k % 10 == 0:
                    state = correct_focal_position(
                        state, FrameEstimate(Vec2(1.0, 2.0), 2, 0.0), params
                    )
                imu = ImuSample(0.01, -0.02, 0.5, k * 0.01)
                state = correct_focal_acceleration(state, imu, params)
            return state

        a, b = run(), run()
        assert np.array_equal(a.belief.mean, b.belief.mean)
        assert np.array_equal(a.belief.cov, b.belief.cov)

    def test_constant_accel_bias_keeps_position_error_bounded(self):
        batch = focal_consistency_batch(
            FocalParams(), n_runs=4, duration=20.0, seed=3, accel_bias=Vec2(0.3, 0.0)
        )
        errors = np.array(
            [[np.linalg.norm(e) for e, _ in run] for run in batch.position_runs]
        )
        first_half = errors[:, 200 : errors.shape[1] // 2].max()
        second_half = errors[:, errors.shape[1] // 2 :].max()
        assert second_half < 3.0 * first_half  # bounded, not divergent


class TestConsistencyBatch:
    def test_anees_in_band_position_and_velocity(self):
        batch = focal_consistency_batch(FocalParams(), n_runs=12, duration=8.0, seed=1)
        steady = batch.times >= 2.0
        for runs in (batch.position_runs, batch.velocity_runs):
            report = anees_series(runs)
            # the band brackets the NEES mean, which equals the marginal dim
            assert report.r1 < report.dim < report.r2
            in_band = np.mean(
                (report.values[steady] >= report.r1) & (report.values[steady] <= report.r2)
            )
            assert in_band >= 0.9
