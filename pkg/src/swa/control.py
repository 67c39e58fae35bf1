"""Neighborhood selection and the lateral velocity command.

The command is state feedback on the focal belief, v_d = -k_p p - k_v v,
saturated in norm; it drives the UAV toward the floating-frame origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Vec2
from .focal import FocalBelief
from .surroundings import NeighborTrack


@dataclass(frozen=True)
class ControlParams:
    """Feedback gains, command saturation, and neighborhood bounds.

    ``neighbor_cap`` defaults to 2 so the frame solver runs in its
    fixed-radius two-neighbor regime, which gives the formation a size
    set-point; larger caps switch to the free-radius least-squares fit
    whose center is scale-indifferent.
    """

    k_p: float = 0.5
    k_v: float = 0.63
    v_max: float = 7.0
    neighbor_range: float = 50.0
    neighbor_cap: int = 2

    def __post_init__(self) -> None:
        if not (self.k_p > 0.0 and self.k_v > 0.0):
            raise ValueError("feedback gains must be positive")
        if not (self.v_max > 0.0):
            raise ValueError("command saturation must be positive")


def select_neighborhood(tracks: Sequence[NeighborTrack], params: ControlParams) -> list[NeighborTrack]:
    """Nearest tracks within range, capped, ties broken by ascending id."""
    in_range = [t for t in tracks if t.position().norm() <= params.neighbor_range]
    in_range.sort(key=lambda t: (t.position().norm(), t.uav_id))
    return in_range[: params.neighbor_cap]


def saturate(v: Vec2, v_max: float) -> Vec2:
    """Clamp the norm to v_max without changing direction."""
    speed = v.norm()
    if speed <= v_max or speed == 0.0:
        return v
    return v * (v_max / speed)


def compute_velocity_command(state: FocalBelief, params: ControlParams) -> Vec2:
    """Velocity command from the estimated floating-frame state."""
    p = state.position()
    v = state.velocity()
    command = -params.k_p * p + -params.k_v * v
    return saturate(command, params.v_max)
