"""Planar geometry, Gaussian belief containers, and small dense linear algebra.

Everything downstream (the neighbor track bank, the floating-frame solver,
the focal estimator, the observability analysis) builds on the types here.
Angles are radians, positions meters; all frames are right-handed.

Conventions:
  * ``Rot2(a)`` is the counterclockwise rotation of the plane by ``a``.
  * Measurements from the mutual perception system arrive in the observer's
    body frame and are mapped into its stable frame with the transpose of
    the heading rotation, see :func:`rotate_body_to_stable`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Vec2",
    "Rot2",
    "Pose2",
    "Belief",
    "rotate_body_to_stable",
    "kf_predict",
    "kf_correct",
    "symmetrize",
    "pinv_normal_equations",
    "numerical_rank",
]


def _require_finite(label: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{label} must be finite, got {v!r}")


@dataclass(frozen=True)
class Vec2:
    """Planar vector; units are contextual (m, m/s, m/s^2)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        _require_finite("Vec2 component", self.x, self.y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def perp(self) -> "Vec2":
        """Counterclockwise perpendicular (-y, x)."""
        return Vec2(-self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def from_array(a) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class Rot2:
    """Counterclockwise rotation of the plane by ``angle`` radians."""

    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", float(self.angle))
        _require_finite("Rot2 angle", self.angle)

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def apply(self, v: Vec2) -> Vec2:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)

    def apply_transpose(self, v: Vec2) -> Vec2:
        """Apply the inverse rotation (transpose of :attr:`matrix`)."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Vec2(c * v.x + s * v.y, -s * v.x + c * v.y)

    def inverse(self) -> "Rot2":
        return Rot2(-self.angle)

    def compose(self, other: "Rot2") -> "Rot2":
        return Rot2(self.angle + other.angle)


@dataclass(frozen=True)
class Pose2:
    """Rigid planar transform: ``apply(v) = R v + t``."""

    rotation: Rot2
    translation: Vec2

    @staticmethod
    def identity() -> "Pose2":
        return Pose2(Rot2(0.0), Vec2(0.0, 0.0))

    def apply(self, v: Vec2) -> Vec2:
        return self.rotation.apply(v) + self.translation

    def compose(self, other: "Pose2") -> "Pose2":
        return Pose2(
            self.rotation.compose(other.rotation),
            self.rotation.apply(other.translation) + self.translation,
        )

    def inverse(self) -> "Pose2":
        inv_rot = self.rotation.inverse()
        return Pose2(inv_rot, -inv_rot.apply(self.translation))


def rotate_body_to_stable(v_body: Vec2, body_to_stable: Rot2) -> Vec2:
    """Express a body-frame vector in the stable frame.

    The stable frame keeps the UAV's initial orientation while the body
    yaws with the heading; the mapping applies the transpose of the
    heading rotation handed in, so ``Rot2(pi/2)`` sends (1, 0) to (0, -1).
    """
    return body_to_stable.apply_transpose(v_body)


def symmetrize(cov: np.ndarray) -> np.ndarray:
    """Average a covariance with its transpose to cancel round-off skew."""
    return (cov + cov.T) * 0.5


class Belief:
    """Gaussian state estimate: mean vector plus covariance matrix.

    The covariance is resymmetrized on construction; filter updates return
    new instances, so a Belief can be shared freely once built.
    """

    __slots__ = ("mean", "cov")

    def __init__(self, mean, cov):
        mean = np.asarray(mean, dtype=float).reshape(-1)
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match state dim {mean.size}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("belief mean/covariance must be finite")
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValueError("covariance must be symmetric within 1e-9")
        self.mean = mean
        self.cov = symmetrize(cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def __repr__(self) -> str:
        return f"Belief(mean={self.mean!r})"


def kf_predict(belief: Belief, F: np.ndarray, Q: np.ndarray, control: np.ndarray | None = None) -> Belief:
    """Linear Kalman prediction: mean -> F m (+ control), cov -> F P F^T + Q."""
    mean = F @ belief.mean
    if control is not None:
        mean = mean + control
    cov = F @ belief.cov @ F.T + Q
    return Belief(mean, symmetrize(cov))


def kf_correct(belief: Belief, z: np.ndarray, H: np.ndarray, R: np.ndarray) -> Belief:
    """Linear Kalman correction with measurement z = H x + v, v ~ (0, R).

    Raises np.linalg.LinAlgError when the innovation covariance is singular,
    which signals a corrupt covariance upstream.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    P = belief.cov
    S = H @ P @ H.T + R
    # K = P H^T S^{-1}; solve on the transposed system avoids forming S^{-1}
    K = np.linalg.solve(S, H @ P).T
    mean = belief.mean + K @ (z - H @ belief.mean)
    cov = P - K @ H @ P
    return Belief(mean, symmetrize(cov))


def pinv_normal_equations(A: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse computed as (A^T A)^{-1} A^T.

    Falls back to an SVD pseudoinverse when A^T A is singular within
    tolerance (smallest singular value <= 1e-9 of the largest), which
    covers collinear-neighbor degeneracy in the circle fit.
    """
    A = np.asarray(A, dtype=float)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0 or sv[-1] <= 1e-9 * sv[0]:
        return np.linalg.pinv(A)
    return np.linalg.solve(A.T @ A, A.T)


def numerical_rank(M: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Count singular values above rel_tol times the largest one."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))
