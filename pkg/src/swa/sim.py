"""Deterministic fixed-step multi-agent simulator.

Each UAV's true planar kinematics follow a first-order velocity response
to its commanded velocity. Before the dropout instant agents hold their
start positions from truth state (emulating intact absolute localization);
at dropout every agent switches to relative-only estimation: either the
full stack (track bank, floating-frame fit, focal filter, feedback
control) or, in ``standalone-baseline`` mode, dead reckoning on tilt-derived
acceleration alone.

Event order inside one step is fixed: truth integration, sensor emission,
per-agent estimation, control. All randomness flows through per-(agent,
channel) substreams of one seed, so runs are reproducible byte for byte
and adding an agent does not disturb the draws of existing ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import analysis
from .config import MODE_SWA, ScenarioConfig
from .control import compute_velocity_command, saturate, select_neighborhood
from .core import Rot2, Vec2
from .floating_frame import (
    DegenerateGeometryError,
    FrameEstimate,
    NoCircleError,
    estimate_frame,
)
from .focal import (
    FocalBelief,
    ImuSample,
    correct_focal_acceleration,
    correct_focal_position,
    initial_focal_belief,
    predict_dead_reckoning,
    predict_focal,
)
from .surroundings import TrackBank

__all__ = [
    "UavTruth",
    "SimLog",
    "step_truth",
    "emit_relative_detection",
    "emit_imu_sample",
    "rng_stream",
    "run_scenario",
    "summarize_log",
    "log_schema",
    "metrics_schema",
    "write_schema_file",
    "format_float",
    "write_csv",
    "read_csv_columns",
]


class SimulationError(RuntimeError):
    """A scenario failed mid-run; carries the failing step index."""

    def __init__(self, step: int, t: float, cause: BaseException):
        super().__init__(f"simulation failed at step {step} (t = {t:.3f} s): {cause}")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class UavTruth:
    """Ground-truth world-frame state of one UAV."""

    position: Vec2
    velocity: Vec2
    commanded_velocity: Vec2
    imu_bias: Vec2
    heading: float


def step_truth(truth: UavTruth, v_cmd: Vec2, dt: float, tau: float) -> UavTruth:
    """First-order velocity response, then position integration."""
    e_d = math.exp(-dt / tau)
    velocity = truth.velocity * e_d + v_cmd * (1.0 - e_d)
    position = truth.position + velocity * dt
    return UavTruth(position, velocity, v_cmd, truth.imu_bias, truth.heading)


def emit_relative_detection(
    observer: UavTruth, target: UavTruth, rng: np.random.Generator, noise_sigma: float
) -> Vec2:
    """Noisy body-frame relative position of the target seen by the observer."""
    offset = target.position - observer.position
    body = Rot2(observer.heading).apply(offset)
    noise = rng.normal(0.0, noise_sigma, 2)
    return Vec2(body.x + noise[0], body.y + noise[1])


def emit_imu_sample(
    truth: UavTruth,
    accel_true: Vec2,
    rng: np.random.Generator,
    tilt_noise_sigma: float,
    tilt_accel_gain: float,
    stamp: float,
) -> ImuSample:
    """Tilt sample whose acceleration image is accel_true + bias + scaled noise."""
    biased = accel_true + truth.imu_bias
    base = Rot2(truth.heading).apply_transpose(biased * (1.0 / tilt_accel_gain))
    noise = rng.normal(0.0, tilt_noise_sigma, 2)
    return ImuSample(
        pitch=base.x + noise[0], roll=base.y + noise[1], heading=truth.heading, stamp=stamp
    )


def rng_stream(seed: int, agent_id: int, channel: str) -> np.random.Generator:
    """Independent deterministic substream for one (agent, channel) pair."""
    salt = int.from_bytes(channel.encode("utf-8"), "little")
    return np.random.default_rng(np.random.SeedSequence([seed, agent_id, salt]))


@dataclass
class _AgentState:
    uav_id: int
    truth: UavTruth
    home: Vec2
    dropout_at: float
    bank: TrackBank
    focal: FocalBelief | None = None
    v_cmd: Vec2 = Vec2(0.0, 0.0)
    last_frame: FrameEstimate | None = None
    last_frame_time: float = -math.inf
    last_selected_ids: tuple[int, ...] = ()
    accel_true: Vec2 = Vec2(0.0, 0.0)


@dataclass
class SimLog:
    """Decimated time-indexed record of one run."""

    columns: list[str]
    data: np.ndarray
    n_uavs: int
    dt_log: float
    dropout_time: float
    mode: str

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv_text(self) -> str:
        return write_csv(self.columns, self.data)


def _uav_columns(i: int) -> list[str]:
    return [
        f"u{i}_true_x", f"u{i}_true_y", f"u{i}_true_vx", f"u{i}_true_vy",
        f"u{i}_cmd_vx", f"u{i}_cmd_vy",
        f"u{i}_est_x", f"u{i}_est_y", f"u{i}_est_vx", f"u{i}_est_vy",
        f"u{i}_frame_x", f"u{i}_frame_y", f"u{i}_nees",
    ]


def _log_columns(n: int) -> list[str]:
    cols = ["t"]
    for i in range(n):
        cols.extend(_uav_columns(i))
    cols.extend(["centroid_x", "centroid_y", "dnb", "vdrift_x", "vdrift_y", "vdrift_mag"])
    return cols


def _all_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _true_frame_position(agent: _AgentState, agents: list[_AgentState], frame_params) -> Vec2 | None:
    """Floating-frame position implied by true relative neighbor positions."""
    if not agent.last_selected_ids:
        return None
    rel = [agents[j].truth.position - agent.truth.position for j in agent.last_selected_ids]
    try:
        est = estimate_frame(rel, Vec2(0.0, 0.0), frame_params)
    except (DegenerateGeometryError, NoCircleError):
        return None
    if est is None:
        return None
    return -est.center


def run_scenario(config: ScenarioConfig) -> SimLog:
    """Run one scenario to completion and return its log."""
    config.validate()
    surroundings_params = config.surroundings_params()
    frame_params = config.frame_params()
    focal_params = config.focal_params()
    control_params = config.control_params()
    n = config.n_uavs
    dt = config.dt_sim
    swa_mode = config.mode == MODE_SWA
    positions = config.resolve_initial_positions()

    agents: list[_AgentState] = []
    for i in range(n):
        heading = float(rng_stream(config.seed, i, "heading").uniform(-math.pi, math.pi))
        bias = rng_stream(config.seed, i, "bias").normal(0.0, config.imu_bias_sigma, 2)
        truth = UavTruth(
            position=positions[i],
            velocity=Vec2(0.0, 0.0),
            commanded_velocity=Vec2(0.0, 0.0),
            imu_bias=Vec2(bias[0], bias[1]),
            heading=heading,
        )
        agents.append(
            _AgentState(
                uav_id=i,
                truth=truth,
                home=positions[i],
                dropout_at=config.dropout_time + i * config.dropout_stagger,
                bank=TrackBank(surroundings_params),
            )
        )
    detection_rngs = [rng_stream(config.seed, i, "detection") for i in range(n)]
    tilt_rngs = [rng_stream(config.seed, i, "tilt") for i in range(n)]

    steps = round(config.duration / dt)
    steps_p = round(1.0 / (config.f_p * dt))
    steps_a = round(1.0 / (config.f_a * dt))
    steps_log = round(1.0 / (config.log_rate * dt))
    pairs = _all_pairs(n)

    rows: list[list[float]] = [_log_row(0.0, agents, pairs, frame_params)]
    for k in range(1, steps + 1):
        t = k * dt
        try:
            _advance_step(
                k, t, agents, detection_rngs, tilt_rngs, config, swa_mode,
                steps_p, steps_a, frame_params, focal_params, control_params,
            )
        except Exception as exc:
            raise SimulationError(k, t, exc) from exc
        if k % steps_log == 0:
            rows.append(_log_row(t, agents, pairs, frame_params))

    data = np.array(rows, dtype=float)
    dt_log = steps_log * dt
    data = _append_drift_columns(data, dt_log)
    return SimLog(
        columns=_log_columns(n),
        data=data,
        n_uavs=n,
        dt_log=dt_log,
        dropout_time=config.dropout_time,
        mode=config.mode,
    )


def _advance_step(
    k: int,
    t: float,
    agents: list[_AgentState],
    detection_rngs,
    tilt_rngs,
    config: ScenarioConfig,
    swa_mode: bool,
    steps_p: int,
    steps_a: int,
    frame_params,
    focal_params,
    control_params,
) -> None:
    dt = config.dt_sim
    detection_step = (k % steps_p == 0) and swa_mode
    imu_step = k % steps_a == 0

    # truth integration under the command held from the previous step
    for agent in agents:
        old_velocity = agent.truth.velocity
        agent.truth = step_truth(agent.truth, agent.v_cmd, dt, config.focal_tau)
        agent.accel_true = (agent.truth.velocity - old_velocity) * (1.0 / dt)

    # sensor emission
    detections: dict[int, list[tuple[int, Vec2]]] = {}
    if detection_step:
        for agent in agents:
            seen = []
            for other in agents:
                if other.uav_id == agent.uav_id:
                    continue
                z = emit_relative_detection(
                    agent.truth, other.truth, detection_rngs[agent.uav_id],
                    config.detection_noise_sigma,
                )
                seen.append((other.uav_id, z))
            detections[agent.uav_id] = seen
    imu_samples: dict[int, ImuSample] = {}
    if imu_step:
        for agent in agents:
            imu_samples[agent.uav_id] = emit_imu_sample(
                agent.truth, agent.accel_true, tilt_rngs[agent.uav_id],
                config.imu_tilt_noise_sigma, config.tilt_accel_gain, t,
            )

    # per-agent estimation
    for agent in agents:
        if detection_step:
            for target_id, z_body in detections[agent.uav_id]:
                agent.bank.ingest_detection(target_id, z_body, agent.truth.heading, t)
            agent.bank.prune_stale(t)
        if t < agent.dropout_at:
            continue
        if agent.focal is None:
            agent.focal = initial_focal_belief(focal_params, t - dt)
            agent.last_frame_time = t - dt
        if swa_mode:
            agent.focal = predict_focal(agent.focal, agent.v_cmd, dt, focal_params)
        else:
            agent.focal = predict_dead_reckoning(agent.focal, dt, focal_params)
        if detection_step:
            selected = select_neighborhood(agent.bank.all_tracks(), control_params)
            agent.last_selected_ids = tuple(tr.uav_id for tr in selected)
            try:
                frame = estimate_frame(
                    [tr.position() for tr in selected], Vec2(0.0, 0.0), frame_params
                )
            except (DegenerateGeometryError, NoCircleError):
                frame = None
            if frame is not None:
                agent.focal = correct_focal_position(agent.focal, frame, focal_params)
                agent.last_frame = frame
                agent.last_frame_time = t
        if imu_step:
            agent.focal = correct_focal_acceleration(
                agent.focal, imu_samples[agent.uav_id], focal_params
            )

    # control
    for agent in agents:
        if t < agent.dropout_at:
            position_error = agent.truth.position - agent.home
            raw = position_error * -control_params.k_p + agent.truth.velocity * -control_params.k_v
            agent.v_cmd = saturate(raw, control_params.v_max)
        elif swa_mode and (t - agent.last_frame_time) > config.frame_hold_time:
            agent.v_cmd = Vec2(0.0, 0.0)
        else:
            agent.v_cmd = compute_velocity_command(agent.focal, control_params)


def _log_row(t: float, agents: list[_AgentState], pairs, frame_params) -> list[float]:
    row = [t]
    for agent in agents:
        tr = agent.truth
        row.extend([tr.position.x, tr.position.y, tr.velocity.x, tr.velocity.y])
        row.extend([agent.v_cmd.x, agent.v_cmd.y])
        if agent.focal is not None:
            mean = agent.focal.belief.mean
            row.extend([mean[0], mean[1], mean[2], mean[3]])
        else:
            row.extend([math.nan] * 4)
        if agent.last_frame is not None:
            row.extend([agent.last_frame.center.x, agent.last_frame.center.y])
        else:
            row.extend([math.nan, math.nan])
        row.append(_nees_value(agent, agents, frame_params))
    cx = sum(a.truth.position.x for a in agents) / len(agents)
    cy = sum(a.truth.position.y for a in agents) / len(agents)
    row.extend([cx, cy])
    if pairs:
        positions = [a.truth.position for a in agents]
        row.append(analysis.metric_neighbor_distance(positions, pairs))
    else:
        row.append(math.nan)
    row.extend([math.nan, math.nan, math.nan])  # drift columns filled post-run
    return row


def _nees_value(agent: _AgentState, agents: list[_AgentState], frame_params) -> float:
    if agent.focal is None or agent.last_frame is None:
        return math.nan
    true_position = _true_frame_position(agent, agents, frame_params)
    if true_position is None:
        return math.nan
    error = agent.focal.belief.mean[:2] - true_position.as_array()
    cov = agent.focal.belief.cov[:2, :2]
    try:
        return analysis.nees(error, cov)
    except np.linalg.LinAlgError:
        return math.nan


def _append_drift_columns(data: np.ndarray, dt_log: float) -> np.ndarray:
    if data.shape[0] >= 2:
        centroids = data[:, -6:-4]
        velocity = analysis.centroid_velocity(centroids, dt_log)
        data[:, -3] = velocity[:, 0]
        data[:, -2] = velocity[:, 1]
        data[:, -1] = np.linalg.norm(velocity, axis=1)
    return data


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def summarize_log(log: SimLog) -> list[tuple[str, float]]:
    """Scalar run metrics; see :func:`metrics_schema` for the definitions."""
    t = log.column("t")
    dnb = log.column("dnb")
    vdrift = log.column("vdrift_mag")
    post = t >= log.dropout_time
    t_end = t[-1]
    steady = t >= log.dropout_time + 0.5 * max(t_end - log.dropout_time, 0.0)
    tail = t >= t_end - 10.0

    pair_dists = _pairwise_distances(log)
    est_norm_tail = []
    for i in range(log.n_uavs):
        ex = log.column(f"u{i}_est_x")[tail]
        ey = log.column(f"u{i}_est_y")[tail]
        norms = np.hypot(ex, ey)
        est_norm_tail.append(float(np.nanmean(norms)) if np.any(np.isfinite(norms)) else math.nan)
    vel_std = _velocity_consensus_std(log)

    def safe(values: np.ndarray, mask: np.ndarray, reducer) -> float:
        selected = values[mask]
        selected = selected[np.isfinite(selected)]
        return float(reducer(selected)) if selected.size else math.nan

    dnb_initial = float(dnb[0]) if dnb.size else math.nan
    post_idx = np.nonzero(post)[0]
    if post_idx.size >= 2:
        i0 = post_idx[0]
        cx, cy = log.column("centroid_x"), log.column("centroid_y")
        elapsed = t[-1] - t[i0]
        vdrift_net = float(math.hypot(cx[-1] - cx[i0], cy[-1] - cy[i0]) / elapsed)
    else:
        vdrift_net = math.nan
    metrics = [
        ("dnb_initial", dnb_initial),
        ("dnb_final", float(dnb[-1]) if dnb.size else math.nan),
        ("dnb_min_post", safe(dnb, post, np.min)),
        ("dnb_max_post", safe(dnb, post, np.max)),
        ("dnb_mean_steady", safe(dnb, steady, np.mean)),
        ("dnb_ratio_max", safe(dnb, post, np.max) / dnb_initial if dnb_initial else math.nan),
        ("dnb_ratio_final", float(dnb[-1]) / dnb_initial if dnb_initial else math.nan),
        ("pair_min_post", safe(pair_dists.min(axis=1), post, np.min) if pair_dists.size else math.nan),
        ("pair_max_post", safe(pair_dists.max(axis=1), post, np.max) if pair_dists.size else math.nan),
        ("vdrift_max_post", safe(vdrift, post, np.max)),
        ("vdrift_mean_steady", safe(vdrift, steady, np.mean)),
        ("vdrift_net_post", vdrift_net),
        ("est_norm_tail_max", float(np.nanmax(est_norm_tail)) if est_norm_tail else math.nan),
        ("vel_std_steady", safe(vel_std, steady, np.mean)),
    ]
    return metrics


def _pairwise_distances(log: SimLog) -> np.ndarray:
    n = log.n_uavs
    pairs = _all_pairs(n)
    if not pairs:
        return np.zeros((log.data.shape[0], 0))
    xs = np.stack([log.column(f"u{i}_true_x") for i in range(n)], axis=1)
    ys = np.stack([log.column(f"u{i}_true_y") for i in range(n)], axis=1)
    out = np.empty((log.data.shape[0], len(pairs)))
    for c, (i, j) in enumerate(pairs):
        out[:, c] = np.hypot(xs[:, i] - xs[:, j], ys[:, i] - ys[:, j])
    return out


def _velocity_consensus_std(log: SimLog) -> np.ndarray:
    n = log.n_uavs
    vx = np.stack([log.column(f"u{i}_true_vx") for i in range(n)], axis=1)
    vy = np.stack([log.column(f"u{i}_true_vy") for i in range(n)], axis=1)
    return np.maximum(vx.std(axis=1), vy.std(axis=1))


# ---------------------------------------------------------------------------
# CSV and schema plumbing
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    return f"{x:.9g}"


def write_csv(columns: list[str], data: np.ndarray) -> str:
    lines = [",".join(columns)]
    for row in np.atleast_2d(data):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def read_csv_columns(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty CSV")
        columns = header.split(",")
        body = fh.read().strip()
    if body:
        data = np.array(
            [[float(v) for v in line.split(",")] for line in body.splitlines()], dtype=float
        )
    else:
        data = np.zeros((0, len(columns)))
    return columns, data


def log_schema(n_uavs: int) -> list[dict]:
    cols = [{"name": "t", "description": "simulation time (s)"}]
    for i in range(n_uavs):
        cols.extend([
            {"name": f"u{i}_true_x", "description": f"UAV {i} true world x (m)"},
            {"name": f"u{i}_true_y", "description": f"UAV {i} true world y (m)"},
            {"name": f"u{i}_true_vx", "description": f"UAV {i} true world x velocity (m/s)"},
            {"name": f"u{i}_true_vy", "description": f"UAV {i} true world y velocity (m/s)"},
            {"name": f"u{i}_cmd_vx", "description": f"UAV {i} commanded x velocity (m/s)"},
            {"name": f"u{i}_cmd_vy", "description": f"UAV {i} commanded y velocity (m/s)"},
            {"name": f"u{i}_est_x", "description": f"UAV {i} estimated floating-frame x (m); nan before dropout"},
            {"name": f"u{i}_est_y", "description": f"UAV {i} estimated floating-frame y (m); nan before dropout"},
            {"name": f"u{i}_est_vx", "description": f"UAV {i} estimated floating-frame x velocity (m/s)"},
            {"name": f"u{i}_est_vy", "description": f"UAV {i} estimated floating-frame y velocity (m/s)"},
            {"name": f"u{i}_frame_x", "description": f"UAV {i} fitted frame center x in its stable frame (m)"},
            {"name": f"u{i}_frame_y", "description": f"UAV {i} fitted frame center y in its stable frame (m)"},
            {"name": f"u{i}_nees", "description": f"UAV {i} position NEES against the true-geometry frame"},
        ])
    cols.extend([
        {"name": "centroid_x", "description": "swarm centroid x (m)"},
        {"name": "centroid_y", "description": "swarm centroid y (m)"},
        {"name": "dnb", "description": "mean pairwise distance over all UAV pairs (m)"},
        {"name": "vdrift_x", "description": "centroid velocity x, central difference (m/s)"},
        {"name": "vdrift_y", "description": "centroid velocity y, central difference (m/s)"},
        {"name": "vdrift_mag", "description": "centroid drift speed (m/s)"},
    ])
    return cols


def metrics_schema() -> list[dict]:
    post = "post-dropout rows"
    steady = "second half of the post-dropout window"
    return [
        {"name": "metric", "description": "metric name"},
        {"name": "value", "description": "metric value"},
        {"name": "dnb_initial", "description": "mean pairwise distance at t=0 (m)"},
        {"name": "dnb_final", "description": "mean pairwise distance at the last row (m)"},
        {"name": "dnb_min_post", "description": f"min mean pairwise distance over {post} (m)"},
        {"name": "dnb_max_post", "description": f"max mean pairwise distance over {post} (m)"},
        {"name": "dnb_mean_steady", "description": f"mean pairwise distance over the {steady} (m)"},
        {"name": "dnb_ratio_max", "description": "dnb_max_post / dnb_initial"},
        {"name": "dnb_ratio_final", "description": "dnb_final / dnb_initial"},
        {"name": "pair_min_post", "description": f"smallest single pairwise distance over {post} (m)"},
        {"name": "pair_max_post", "description": f"largest single pairwise distance over {post} (m)"},
        {"name": "vdrift_max_post", "description": f"max centroid drift speed over {post} (m/s)"},
        {"name": "vdrift_mean_steady", "description": f"mean centroid drift speed over the {steady} (m/s)"},
        {"name": "vdrift_net_post", "description": "net centroid displacement divided by elapsed time, dropout to end (m/s)"},
        {"name": "est_norm_tail_max", "description": "max over UAVs of mean estimated frame-position norm, last 10 s (m)"},
        {"name": "vel_std_steady", "description": f"mean over the {steady} of the max per-axis velocity std across UAVs (m/s)"},
    ]


def write_schema_file(path, files: dict[str, list[dict]]) -> None:
    payload = {"files": {name: {"columns": cols} for name, cols in files.items()}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
