"""Scenario configuration: flat ``section.key = value`` files.

The on-disk format is one assignment per line with dotted section
prefixes, for example::

    sim.n_uavs = 3
    control.k_p = 0.5
    # comments and blank lines are ignored

Unknown keys are errors. ``resolve()`` folds defaults in and can be
serialized back out; re-parsing a resolved file reproduces the exact
scenario, which is what makes logged runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .control import ControlParams
from .core import Vec2
from .floating_frame import FrameParams
from .focal import FocalParams
from .surroundings import SurroundingsParams

MODE_SWA = "swa"
MODE_STANDALONE = "standalone-baseline"


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ScenarioConfig:
    """Full description of one simulation run."""

    # sim section
    n_uavs: int = 3
    seed: int = 1337
    duration: float = 120.0
    dt_sim: float = 0.01
    f_p: float = 10.0
    f_a: float = 100.0
    dropout_time: float = 10.0
    dropout_stagger: float = 0.0
    detection_noise_sigma: float = 0.1
    imu_tilt_noise_sigma: float = 0.005
    imu_bias_sigma: float = 0.05
    mode: str = MODE_SWA
    ring_radius: float = 10.0
    initial_positions: Optional[list[Vec2]] = None
    log_rate: float = 10.0

    # surroundings section (diagonal process noise per block)
    surroundings_q_pos: float = 1e-3
    surroundings_q_vel: float = 1e-2
    surroundings_q_acc: float = 1e-1
    surroundings_r_meas: float = 0.1
    stale_timeout: float = 2.0
    surroundings_init_vel_var: float = 1.0
    surroundings_init_acc_var: float = 1.0
    gate_enabled: bool = False

    # frame section
    frame_radius: float = 10.0
    frame_hold_time: float = 0.5

    # focal section
    focal_tau: float = 2.8
    focal_q_pos: float = 5e-2
    focal_q_vel: float = 5e-1
    focal_q_acc: float = 5.0
    focal_r_pos: float = 2e-2
    focal_r_acc: float = 2.25
    tilt_accel_gain: float = 6.35
    focal_init_pos_var: float = 1.0
    focal_init_vel_var: float = 1.0
    focal_init_acc_var: float = 1.0

    # control section
    k_p: float = 0.5
    k_v: float = 0.63
    v_max: float = 7.0
    neighbor_range: float = 50.0
    neighbor_cap: int = 2

    def surroundings_params(self) -> SurroundingsParams:
        q = [self.surroundings_q_pos] * 2 + [self.surroundings_q_vel] * 2 + [self.surroundings_q_acc] * 2
        return SurroundingsParams(
            process_noise=np.diag(q),
            meas_noise=self.surroundings_r_meas * np.eye(2),
            stale_timeout=self.stale_timeout,
            init_vel_var=self.surroundings_init_vel_var,
            init_acc_var=self.surroundings_init_acc_var,
            gate_enabled=self.gate_enabled,
        )

    def frame_params(self) -> FrameParams:
        return FrameParams(radius=self.frame_radius)

    def focal_params(self) -> FocalParams:
        q = [self.focal_q_pos] * 2 + [self.focal_q_vel] * 2 + [self.focal_q_acc] * 2
        return FocalParams(
            tau=self.focal_tau,
            process_noise=np.diag(q),
            pos_meas_noise=self.focal_r_pos * np.eye(2),
            acc_meas_noise=self.focal_r_acc * np.eye(2),
            tilt_accel_gain=self.tilt_accel_gain,
            init_pos_var=self.focal_init_pos_var,
            init_vel_var=self.focal_init_vel_var,
            init_acc_var=self.focal_init_acc_var,
        )

    def control_params(self) -> ControlParams:
        return ControlParams(
            k_p=self.k_p,
            k_v=self.k_v,
            v_max=self.v_max,
            neighbor_range=self.neighbor_range,
            neighbor_cap=self.neighbor_cap,
        )

    def resolve_initial_positions(self) -> list[Vec2]:
        """Explicit positions if given, else even placement on a ring."""
        if self.initial_positions is not None:
            return list(self.initial_positions)
        out = []
        for i in range(self.n_uavs):
            angle = 2.0 * math.pi * i / self.n_uavs
            out.append(Vec2(self.ring_radius * math.cos(angle), self.ring_radius * math.sin(angle)))
        return out

    def validate(self) -> None:
        """Raise ConfigError naming the first offending key."""
        def check(ok: bool, key: str, message: str) -> None:
            if not ok:
                raise ConfigError(key, message)

        check(self.n_uavs >= 1, "sim.n_uavs", f"must be >= 1, got {self.n_uavs}")
        check(self.seed >= 0, "sim.seed", "must be a non-negative integer")
        check(self.duration >= 0.0, "sim.duration", "must be >= 0")
        check(self.dt_sim > 0.0, "sim.dt_sim", "must be > 0")
        check(self.f_p > 0.0, "sim.f_p", "must be > 0")
        check(self.f_a > 0.0, "sim.f_a", "must be > 0")
        check(_divides(self.dt_sim, 1.0 / self.f_p), "sim.f_p", "detection period must be an exact multiple of sim.dt_sim")
        check(_divides(self.dt_sim, 1.0 / self.f_a), "sim.f_a", "IMU period must be an exact multiple of sim.dt_sim")
        check(self.log_rate > 0.0, "sim.log_rate", "must be > 0")
        check(_divides(self.dt_sim, 1.0 / self.log_rate), "sim.log_rate", "log period must be an exact multiple of sim.dt_sim")
        check(self.dropout_time >= 0.0, "sim.dropout_time", "must be >= 0")
        check(self.dropout_stagger >= 0.0, "sim.dropout_stagger", "must be >= 0")
        check(self.detection_noise_sigma >= 0.0, "sim.detection_noise_sigma", "must be >= 0")
        check(self.imu_tilt_noise_sigma >= 0.0, "sim.imu_tilt_noise_sigma", "must be >= 0")
        check(self.imu_bias_sigma >= 0.0, "sim.imu_bias_sigma", "must be >= 0")
        check(self.mode in (MODE_SWA, MODE_STANDALONE), "sim.mode", f"must be '{MODE_SWA}' or '{MODE_STANDALONE}'")
        check(self.ring_radius > 0.0, "sim.ring_radius", "must be > 0")
        if self.initial_positions is not None:
            check(
                len(self.initial_positions) == self.n_uavs,
                "sim.initial_positions",
                f"expected {self.n_uavs} positions, got {len(self.initial_positions)}",
            )
        for key in (
            "surroundings_q_pos", "surroundings_q_vel", "surroundings_q_acc", "surroundings_r_meas",
            "surroundings_init_vel_var", "surroundings_init_acc_var",
        ):
            check(getattr(self, key) > 0.0, _FIELD_TO_KEY[key], "must be > 0")
        check(self.stale_timeout > 0.0, "surroundings.stale_timeout", "must be > 0")
        check(self.frame_radius > 0.0, "frame.radius", "must be > 0")
        check(self.frame_hold_time >= 0.0, "frame.hold_time", "must be >= 0")
        check(self.focal_tau > 0.0, "focal.tau", "must be > 0")
        for key in (
            "focal_q_pos", "focal_q_vel", "focal_q_acc", "focal_r_pos", "focal_r_acc",
            "focal_init_pos_var", "focal_init_vel_var", "focal_init_acc_var",
        ):
            check(getattr(self, key) > 0.0, _FIELD_TO_KEY[key], "must be > 0")
        check(self.tilt_accel_gain > 0.0, "focal.tilt_accel_gain", "must be > 0")
        check(self.k_p > 0.0, "control.k_p", "must be > 0")
        check(self.k_v > 0.0, "control.k_v", "must be > 0")
        check(self.v_max > 0.0, "control.v_max", "must be > 0")
        check(self.neighbor_range > 0.0, "control.neighbor_range", "must be > 0")
        check(self.neighbor_cap >= 1, "control.neighbor_cap", "must be >= 1")


def _divides(dt: float, period: float) -> bool:
    steps = round(period / dt)
    return steps >= 1 and abs(steps * dt - period) <= 1e-9


# dotted key -> (dataclass field, type tag); single source for parse/serialize
_KEY_TO_FIELD: dict[str, tuple[str, str]] = {
    "sim.n_uavs": ("n_uavs", "int"),
    "sim.seed": ("seed", "int"),
    "sim.duration": ("duration", "float"),
    "sim.dt_sim": ("dt_sim", "float"),
    "sim.f_p": ("f_p", "float"),
    "sim.f_a": ("f_a", "float"),
    "sim.dropout_time": ("dropout_time", "float"),
    "sim.dropout_stagger": ("dropout_stagger", "float"),
    "sim.detection_noise_sigma": ("detection_noise_sigma", "float"),
    "sim.imu_tilt_noise_sigma": ("imu_tilt_noise_sigma", "float"),
    "sim.imu_bias_sigma": ("imu_bias_sigma", "float"),
    "sim.mode": ("mode", "str"),
    "sim.ring_radius": ("ring_radius", "float"),
    "sim.initial_positions": ("initial_positions", "positions"),
    "sim.log_rate": ("log_rate", "float"),
    "surroundings.q_pos": ("surroundings_q_pos", "float"),
    "surroundings.q_vel": ("surroundings_q_vel", "float"),
    "surroundings.q_acc": ("surroundings_q_acc", "float"),
    "surroundings.r_meas": ("surroundings_r_meas", "float"),
    "surroundings.stale_timeout": ("stale_timeout", "float"),
    "surroundings.init_vel_var": ("surroundings_init_vel_var", "float"),
    "surroundings.init_acc_var": ("surroundings_init_acc_var", "float"),
    "surroundings.gate_enabled": ("gate_enabled", "bool"),
    "frame.radius": ("frame_radius", "float"),
    "frame.hold_time": ("frame_hold_time", "float"),
    "focal.tau": ("focal_tau", "float"),
    "focal.q_pos": ("focal_q_pos", "float"),
    "focal.q_vel": ("focal_q_vel", "float"),
    "focal.q_acc": ("focal_q_acc", "float"),
    "focal.r_pos": ("focal_r_pos", "float"),
    "focal.r_acc": ("focal_r_acc", "float"),
    "focal.tilt_accel_gain": ("tilt_accel_gain", "float"),
    "focal.init_pos_var": ("focal_init_pos_var", "float"),
    "focal.init_vel_var": ("focal_init_vel_var", "float"),
    "focal.init_acc_var": ("focal_init_acc_var", "float"),
    "control.k_p": ("k_p", "float"),
    "control.k_v": ("k_v", "float"),
    "control.v_max": ("v_max", "float"),
    "control.neighbor_range": ("neighbor_range", "float"),
    "control.neighbor_cap": ("neighbor_cap", "int"),
}

_FIELD_TO_KEY = {fld: key for key, (fld, _) in _KEY_TO_FIELD.items()}


def _parse_value(key: str, kind: str, raw: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "str":
            return raw
        if kind == "positions":
            points = []
            for chunk in raw.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                xs, ys = chunk.split(",")
                points.append(Vec2(float(xs), float(ys)))
            if not points:
                raise ValueError("empty position list")
            return points
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(key, f"cannot parse value {raw!r} ({exc})") from exc
    raise ConfigError(key, f"unknown value kind {kind!r}")


def _format_value(kind: str, value) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind == "positions":
        return "; ".join(f"{p.x!r},{p.y!r}" for p in value)
    if kind == "float":
        return repr(float(value))
    return str(value)


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse key = value lines into a ScenarioConfig (defaults fill the gaps)."""
    config = ScenarioConfig()
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(key, "unknown configuration key")
        if key in seen:
            raise ConfigError(key, "duplicate configuration key")
        seen.add(key)
        fld, kind = _KEY_TO_FIELD[key]
        setattr(config, fld, _parse_value(key, kind, raw))
    return config


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def serialize_config(config: ScenarioConfig) -> str:
    """Emit every key (defaults included) sorted, suitable for re-parsing."""
    lines = []
    for key in sorted(_KEY_TO_FIELD):
        fld, kind = _KEY_TO_FIELD[key]
        value = getattr(config, fld)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(kind, value)}")
    return "\n".join(lines) + "\n"


def set_config_key(config: ScenarioConfig, key: str, raw: str) -> ScenarioConfig:
    """Return a copy with one dotted key replaced by a parsed raw value."""
    if key not in _KEY_TO_FIELD:
        raise ConfigError(key, "unknown configuration key")
    fld, kind = _KEY_TO_FIELD[key]
    return replace(config, **{fld: _parse_value(key, kind, raw)})


def known_keys() -> list[str]:
    return sorted(_KEY_TO_FIELD)
