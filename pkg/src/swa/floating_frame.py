"""Floating control-frame origin: fixed-radius circle fit through neighbors.

The focal UAV's desired position is the center of a circle of radius
``radius`` passing through its neighbors' estimated positions. With three
or more neighbors the center comes from the linearized least-squares system

    a x_j + b y_j + c = x_j^2 + y_j^2 - r^2,   a = 2 x_c, b = 2 y_c,

solved by pseudoinverse; c is a free offset, so for n >= 3 the recovered
center is the algebraic best-fit circle center. With two neighbors the two
candidate centers of the radius-r circle through them are disambiguated by
proximity to the focal UAV; with one neighbor the center lies on the line
from the focal UAV to that neighbor at distance r from it.

All positions are in the focal UAV's stable frame, so the focal UAV itself
sits at the origin; callers typically pass (0, 0) as the hint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Vec2, pinv_normal_equations

_COINCIDENT_TOL = 1e-9


class DegenerateGeometryError(ValueError):
    """Neighbor geometry admits no unique circle center (collinear/coincident)."""


class NoCircleError(ValueError):
    """No circle of the required radius passes through the neighbors."""


@dataclass(frozen=True)
class FrameParams:
    """Fixed radius (m) of the circle defining the desired position."""

    radius: float = 10.0

    def __post_init__(self) -> None:
        if not (self.radius > 0.0):
            raise ValueError("frame radius must be positive")


@dataclass(frozen=True)
class FrameEstimate:
    """Solved frame origin.

    ``condition`` is the smallest singular value of the fit matrix for the
    general (n >= 3) solver and 0.0 for the closed-form fallbacks.
    """

    center: Vec2
    n_used: int
    condition: float


def solve_center_general(neighbors: Sequence[Vec2], radius: float) -> FrameEstimate:
    """Least-squares circle center through n >= 3 neighbor positions."""
    n = len(neighbors)
    if n < 3:
        raise ValueError(f"general solver needs at least 3 neighbors, got {n}")
    A = np.array([[p.x, p.y, 1.0] for p in neighbors])
    b = np.array([p.x * p.x + p.y * p.y - radius * radius for p in neighbors])
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-9 * sv[0]:
        raise DegenerateGeometryError("neighbors are collinear; circle center is not unique")
    sol = pinv_normal_equations(A) @ b
    return FrameEstimate(Vec2(0.5 * sol[0], 0.5 * sol[1]), n_used=n, condition=float(sv[-1]))


def solve_center_two(n1: Vec2, n2: Vec2, fuav_hint: Vec2, radius: float) -> FrameEstimate:
    """Center of the radius-r circle through two neighbors, nearer the focal UAV.

    Ties between the two candidates break toward the candidate on the left
    of the chord n1 -> n2, which keeps repeated runs deterministic.
    """
    chord = n2 - n1
    d = chord.norm()
    if d <= _COINCIDENT_TOL:
        raise DegenerateGeometryError("coincident neighbors do not define a chord")
    if d > 2.0 * radius:
        raise NoCircleError(f"neighbor separation {d:.3f} m exceeds circle diameter {2.0 * radius:.3f} m")
    midpoint = (n1 + n2) * 0.5
    half_gap = math.sqrt(max(radius * radius - 0.25 * d * d, 0.0))
    left_normal = chord.perp() * (1.0 / d)
    first = midpoint + left_normal * half_gap
    second = midpoint - left_normal * half_gap
    chosen = first if (first - fuav_hint).norm() <= (second - fuav_hint).norm() else second
    return FrameEstimate(chosen, n_used=2, condition=0.0)


def solve_center_one(n1: Vec2, fuav_hint: Vec2, radius: float) -> FrameEstimate:
    """Center on the focal-to-neighbor line at distance r from the neighbor."""
    offset = fuav_hint - n1
    d = offset.norm()
    if d <= _COINCIDENT_TOL:
        raise DegenerateGeometryError("neighbor coincides with the focal UAV")
    direction = offset * (1.0 / d)
    candidates = (n1 + direction * radius, n1 - direction * radius)
    chosen = min(candidates, key=lambda c: (c - fuav_hint).norm())
    return FrameEstimate(chosen, n_used=1, condition=0.0)


def estimate_frame(
    neighbor_positions: Sequence[Vec2], fuav_hint: Vec2, params: FrameParams
) -> Optional[FrameEstimate]:
    """Dispatch on neighbor count; None signals "hold the last valid frame"."""
    n = len(neighbor_positions)
    if n == 0:
        return None
    if n == 1:
        return solve_center_one(neighbor_positions[0], fuav_hint, params.radius)
    if n == 2:
        return solve_center_two(neighbor_positions[0], neighbor_positions[1], fuav_hint, params.radius)
    return solve_center_general(neighbor_positions, params.radius)
