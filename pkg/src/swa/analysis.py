"""Offline analysis tools.

Three groups live here:

* joint-swarm observability: build the combined position/velocity system
  with relative-position measurements, stack the observability matrix,
  and verify its rank deficiency and null-space basis (the four uniform
  translation/velocity modes);
* filter consistency: NEES, per-step ANEES over independent runs, and the
  chi-square acceptance interval. The chi-square inverse CDF is computed
  in-repo by bisection on the regularized lower incomplete gamma function
  so the analysis carries no statistics dependency;
* scenario metrics: mean neighbor distance and the drift velocity of the
  swarm centroid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import numerical_rank

__all__ = [
    "CombinedSystem",
    "build_combined_system",
    "observability_matrix",
    "observability_rank",
    "unobservable_basis",
    "unobservable_basis_check",
    "with_absolute_position_measurement",
    "nees",
    "AneesReport",
    "anees_series",
    "anees_bounds",
    "chi_square_quantile",
    "metric_neighbor_distance",
    "centroid_velocity",
    "metric_drift_velocity",
]

_NULLSPACE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Joint-swarm observability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombinedSystem:
    """Stacked swarm model: 4 states (x, y, vx, vy) per UAV.

    ``transition`` is block diagonal with per-UAV [I, I dt; 0, I];
    ``measurement`` holds 2 rows per ordered UAV pair (k, l), +I on k's
    position block and -I on l's.
    """

    transition: np.ndarray
    measurement: np.ndarray
    n: int


def build_combined_system(n: int, dt: float) -> CombinedSystem:
    """Combined system for n UAVs exchanging relative position measurements."""
    if n < 2:
        raise ValueError(f"combined system needs at least 2 UAVs, got {n}")
    block = np.eye(4)
    block[0, 2] = block[1, 3] = dt
    F = np.kron(np.eye(n), block)
    rows = []
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            row = np.zeros((2, 4 * n))
            row[:, 4 * k : 4 * k + 2] = np.eye(2)
            row[:, 4 * l : 4 * l + 2] = -np.eye(2)
            rows.append(row)
    H = np.vstack(rows)
    return CombinedSystem(transition=F, measurement=H, n=n)


def observability_matrix(sys: CombinedSystem) -> np.ndarray:
    """Standard stacking [H; H F; ...; H F^(d-1)] with d the state dimension."""
    d = sys.transition.shape[0]
    blocks = []
    HFk = sys.measurement.copy()
    for _ in range(d):
        blocks.append(HFk)
        HFk = HFk @ sys.transition
    return np.vstack(blocks)


def observability_rank(sys: CombinedSystem) -> int:
    return numerical_rank(observability_matrix(sys))


def unobservable_basis(n: int) -> list[np.ndarray]:
    """The four uniform modes 1_n (x) e_j: common x/y shift and x/y velocity."""
    ones = np.ones(n)
    return [np.kron(ones, np.eye(4)[:, j]) for j in range(4)]


def unobservable_basis_check(sys: CombinedSystem) -> bool:
    """True iff the four uniform modes lie in, and span, the null space."""
    O = observability_matrix(sys)
    norm_O = np.linalg.norm(O)
    for v in unobservable_basis(sys.n):
        if np.linalg.norm(O @ v) > _NULLSPACE_TOL * norm_O * np.linalg.norm(v):
            return False
    nullity = O.shape[1] - observability_rank(sys)
    return nullity == 4


def with_absolute_position_measurement(sys: CombinedSystem, uav_index: int) -> CombinedSystem:
    """Append one absolute position measurement pair for a single UAV."""
    if not 0 <= uav_index < sys.n:
        raise ValueError(f"uav_index {uav_index} out of range for n={sys.n}")
    row = np.zeros((2, 4 * sys.n))
    row[:, 4 * uav_index : 4 * uav_index + 2] = np.eye(2)
    return CombinedSystem(
        transition=sys.transition,
        measurement=np.vstack([sys.measurement, row]),
        n=sys.n,
    )


# ---------------------------------------------------------------------------
# Chi-square inverse CDF (regularized incomplete gamma + bisection)
# ---------------------------------------------------------------------------

def _lower_gamma_regularized(a: float, x: float) -> float:
    """P(a, x): series expansion below a+1, Lentz continued fraction above."""
    if a <= 0.0 or x < 0.0:
        raise ValueError("incomplete gamma requires a > 0 and x >= 0")
    if x == 0.0:
        return 0.0
    log_prefactor = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        denom = a
        for _ in range(1000):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, total * math.exp(log_prefactor))
    # continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(log_prefactor) * h)


def _chi_square_cdf(x: float, dof: float) -> float:
    return _lower_gamma_regularized(0.5 * dof, 0.5 * x)


def chi_square_quantile(p: float, dof: float) -> float:
    """Inverse chi-square CDF by bisection, absolute tolerance 1e-10."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {p}")
    if dof <= 0:
        raise ValueError("degrees of freedom must be positive")
    lo, hi = 0.0, max(float(dof), 1.0)
    for _ in range(200):
        if _chi_square_cdf(hi, dof) >= p:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the chi-square quantile")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if _chi_square_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# NEES / ANEES
# ---------------------------------------------------------------------------

def nees(error: np.ndarray, cov: np.ndarray) -> float:
    """Normalized estimation error squared, e^T P^{-1} e."""
    error = np.asarray(error, dtype=float).reshape(-1)
    cov = np.asarray(cov, dtype=float)
    return float(error @ np.linalg.solve(cov, error))


def anees_bounds(n_runs: int, dim: int, alpha: float = 0.05) -> tuple[float, float]:
    """Two-sided chi-square acceptance interval for per-step average NEES."""
    dof = n_runs * dim
    r1 = chi_square_quantile(alpha / 2.0, dof) / n_runs
    r2 = chi_square_quantile(1.0 - alpha / 2.0, dof) / n_runs
    return r1, r2


@dataclass(frozen=True)
class AneesReport:
    """Per-step average NEES with its acceptance interval."""

    values: np.ndarray
    r1: float
    r2: float
    pass_fraction: float
    n_runs: int
    dim: int


def anees_series(
    runs: Sequence[Sequence[tuple[np.ndarray, np.ndarray]]], alpha: float = 0.05
) -> AneesReport:
    """Average per-step NEES over aligned runs of (error, covariance) pairs."""
    if len(runs) == 0:
        raise ValueError("at least one run is required")
    steps = len(runs[0])
    if any(len(r) != steps for r in runs):
        raise ValueError("runs must have identical step counts")
    if steps == 0:
        raise ValueError("runs must contain at least one step")
    dim = np.asarray(runs[0][0][0]).size
    K = len(runs)
    values = np.zeros(steps)
    for k in range(steps):
        values[k] = sum(nees(run[k][0], run[k][1]) for run in runs) / K
    r1, r2 = anees_bounds(K, dim, alpha)
    inside = np.count_nonzero((values >= r1) & (values <= r2))
    return AneesReport(values, r1, r2, inside / steps, K, dim)


# ---------------------------------------------------------------------------
# Cohesion and drift metrics
# ---------------------------------------------------------------------------

def metric_neighbor_distance(positions: Sequence, pairs: Sequence[tuple[int, int]]) -> float:
    """Mean Euclidean distance over the given neighbor pairs."""
    if len(pairs) == 0:
        raise ValueError("neighbor distance needs at least one pair")
    total = 0.0
    for i, j in pairs:
        total += (positions[i] - positions[j]).norm()
    return total / len(pairs)


def centroid_velocity(centroids: np.ndarray, dt: float) -> np.ndarray:
    """Central-difference velocity of a centroid trajectory, one-sided at the ends."""
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim != 2 or centroids.shape[0] < 2:
        raise ValueError("centroid series needs at least 2 samples of shape (T, 2)")
    vel = np.empty_like(centroids)
    vel[1:-1] = (centroids[2:] - centroids[:-2]) / (2.0 * dt)
    vel[0] = (centroids[1] - centroids[0]) / dt
    vel[-1] = (centroids[-1] - centroids[-2]) / dt
    return vel


def metric_drift_velocity(centroids: np.ndarray, dt: float) -> np.ndarray:
    """Magnitude series of the centroid drift velocity."""
    return np.linalg.norm(centroid_velocity(centroids, dt), axis=1)
