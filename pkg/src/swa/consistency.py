"""Model-matched consistency batches for the focal estimator.

Truth trajectories are sampled from the focal filter's own model (same
transition, same process noise, initial state drawn from the initial
covariance), position fixes arrive at ``f_p`` and acceleration
measurements at ``f_a`` with the filter's measurement noises. Under these
conditions the per-step NEES of any marginal is chi-square distributed,
so the averaged series must sit inside the chi-square acceptance band.

Position fixes go through the regular floating-frame correction (the
measurement is the negated center). Acceleration corrections are applied
at the filter level rather than through a tilt sample: a matched-model
truth lets the acceleration state random-walk far beyond physical tilt
range, and the tilt conversion is a bijection checked by its own tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vec2, kf_correct
from .floating_frame import FrameEstimate
from .focal import (
    H_ACCELERATION,
    FocalBelief,
    FocalParams,
    correct_focal_position,
    focal_transition,
    initial_focal_belief,
    predict_focal,
)
from .sim import rng_stream

StepPairs = list[tuple[np.ndarray, np.ndarray]]


@dataclass
class ConsistencyBatch:
    """Aligned per-run (error, covariance) pairs for two marginals."""

    times: np.ndarray
    position_runs: list[StepPairs]
    velocity_runs: list[StepPairs]


def focal_consistency_batch(
    params: FocalParams,
    n_runs: int = 12,
    duration: float = 30.0,
    dt: float = 0.01,
    f_p: float = 10.0,
    f_a: float = 100.0,
    seed: int = 0,
    accel_bias: Vec2 = Vec2(0.0, 0.0),
) -> ConsistencyBatch:
    """Run ``n_runs`` matched synthetic trajectories through the focal filter.

    ``accel_bias`` is added to every acceleration measurement without the
    filter's knowledge; leave it at zero for consistency evaluation.
    """
    steps = round(duration / dt)
    steps_p = round(1.0 / (f_p * dt))
    steps_a = round(1.0 / (f_a * dt))
    F, _ = focal_transition(dt, params.tau)
    chol_q = np.linalg.cholesky(params.process_noise)
    pos_sigma = math.sqrt(params.pos_meas_noise[0, 0])
    acc_sigma = math.sqrt(params.acc_meas_noise[0, 0])
    bias = accel_bias.as_array()

    times = np.array([k * dt for k in range(1, steps + 1)])
    position_runs: list[StepPairs] = []
    velocity_runs: list[StepPairs] = []
    for run in range(n_runs):
        rng = rng_stream(seed, run, "consistency")
        belief = initial_focal_belief(params, 0.0)
        chol_p0 = np.linalg.cholesky(belief.belief.cov)
        truth = chol_p0 @ rng.standard_normal(6)
        pos_pairs: StepPairs = []
        vel_pairs: StepPairs = []
        for k in range(1, steps + 1):
            truth = F @ truth + chol_q @ rng.standard_normal(6)
            belief = predict_focal(belief, Vec2(0.0, 0.0), dt, params)
            if k % steps_p == 0:
                z = truth[:2] + rng.normal(0.0, pos_sigma, 2)
                frame = FrameEstimate(Vec2(-z[0], -z[1]), n_used=0, condition=0.0)
                belief = correct_focal_position(belief, frame, params)
            if k % steps_a == 0:
                z = truth[4:6] + bias + rng.normal(0.0, acc_sigma, 2)
                belief = FocalBelief(
                    kf_correct(belief.belief, z, H_ACCELERATION, params.acc_meas_noise),
                    belief.stamp,
                )
            error = belief.belief.mean - truth
            pos_pairs.append((error[:2].copy(), belief.belief.cov[:2, :2].copy()))
            vel_pairs.append((error[2:4].copy(), belief.belief.cov[2:4, 2:4].copy()))
        position_runs.append(pos_pairs)
        velocity_runs.append(vel_pairs)
    return ConsistencyBatch(times, position_runs, velocity_runs)
