"""Concentration ellipsoids, their bounding boxes, and box partitions.

The prior support for a fitted candidate is the ellipsoid
(theta - theta_hat)' J (theta - theta_hat) <= mu around the estimate,
with J the observed information.  The axis-aligned bounding box has
halfwidth sqrt(mu * (J^-1)_kk) along axis k, and can be split into L
equal segments per axis for stratified sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .numerics import DimensionMismatch, cholesky, log_det, unit_ball_volume

PARTITION_CAP = 10**6


class PartitionTooLarge(ValueError):
    """Requested partition would exceed PARTITION_CAP sub-boxes."""


def default_mu(dim: int) -> float:
    """Radius 6 + 2 d: ellipsoid mass ~0.995+ under the chi-square law."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return 6.0 + 2.0 * dim


@dataclass(frozen=True)
class Ellipsoid:
    """Region (theta - center)' metric (theta - center) <= radius."""

    center: np.ndarray
    metric: np.ndarray
    radius: float
    chol: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.center.size


def build_ellipsoid(model, mu: float) -> Ellipsoid:
    """Concentration ellipsoid of a fitted model at squared radius mu."""
    if not (mu > 0.0 and math.isfinite(mu)):
        raise ValueError(f"mu must be positive and finite, got {mu}")
    metric = np.asarray(model.fim, dtype=float)
    return Ellipsoid(
        center=np.asarray(model.theta_hat, dtype=float),
        metric=metric,
        radius=float(mu),
        chol=cholesky(metric),
    )


def mahalanobis_sq(e: Ellipsoid, thetas: np.ndarray) -> np.ndarray:
    """(theta - c)' J (theta - c) for each row; shape (m, d) -> (m,)."""
    t = np.asarray(thetas, dtype=float)
    if t.ndim != 2 or t.shape[1] != e.dim:
        raise DimensionMismatch(f"expected shape (m, {e.dim}), got {t.shape}")
    # q = |L' (theta - c)|^2 keeps the form non-negative in floating point
    z = (t - e.center) @ e.chol
    return np.einsum("ij,ij->i", z, z)


def contains(e: Ellipsoid, theta: np.ndarray) -> bool:
    """Closed-region membership test for a single point."""
    th = np.asarray(theta, dtype=float)
    if th.shape != (e.dim,):
        raise DimensionMismatch(f"expected shape ({e.dim},), got {th.shape}")
    return bool(mahalanobis_sq(e, th[None, :])[0] <= e.radius)


def ellipsoid_log_volume(e: Ellipsoid) -> float:
    """log of vol = mu^(d/2) V_d / sqrt(det J)."""
    d = e.dim
    return (
        0.5 * d * math.log(e.radius)
        + math.log(unit_ball_volume(d))
        - 0.5 * log_det(e.metric)
    )


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo_k, hi_k] per axis."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionMismatch(f"bound shapes differ: {lo.shape} vs {hi.shape}")
        if lo.size == 0:
            raise ValueError("empty box")
        if not np.all(hi > lo):
            raise ValueError("each upper bound must exceed its lower bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def log_volume(self) -> float:
        return float(np.sum(np.log(self.widths)))

    def contains_rows(self, thetas: np.ndarray) -> np.ndarray:
        t = np.asarray(thetas, dtype=float)
        if t.ndim != 2 or t.shape[1] != self.dim:
            raise DimensionMismatch(f"expected shape (m, {self.dim}), got {t.shape}")
        return np.all((t >= self.lo) & (t <= self.hi), axis=1)


def bounding_box(e: Ellipsoid) -> Box:
    """Tightest axis-aligned box around the ellipsoid.

    Along axis k the ellipsoid reaches center_k +- sqrt(mu (J^-1)_kk);
    the inverse diagonal comes from the rows of inv(L).
    """
    inv_l = solve_triangular(e.chol, np.eye(e.dim), lower=True)
    inv_diag = np.sum(inv_l * inv_l, axis=0)
    half = np.sqrt(e.radius * inv_diag)
    return Box(e.center - half, e.center + half)


@dataclass(frozen=True)
class BoxPartition:
    """Split of a box into segments-per-axis equal sub-boxes.

    Sub-boxes are indexed 0 .. segments^dim - 1 in row-major order (last
    axis fastest) and materialized lazily via sub_box(); all have equal
    volume, so each carries prior mass 1/count.
    """

    box: Box
    segments: int

    @property
    def count(self) -> int:
        return self.segments ** self.box.dim

    @property
    def mass(self) -> float:
        return 1.0 / self.count

    def sub_box(self, k: int) -> Box:
        if not 0 <= k < self.count:
            raise IndexError(f"sub-box index {k} out of range [0, {self.count})")
        d, L = self.box.dim, self.segments
        if L == 1:
            return self.box
        idx = np.empty(d, dtype=float)
        for axis in range(d - 1, -1, -1):
            idx[axis] = k % L
            k //= L
        # interpolate between the parent bounds so neighbouring sub-boxes
        # share edges exactly and the outer faces coincide with the parent
        f0 = idx / L
        f1 = (idx + 1.0) / L
        lo = self.box.lo * (1.0 - f0) + self.box.hi * f0
        hi = self.box.lo * (1.0 - f1) + self.box.hi * f1
        return Box(lo, hi)


def partition(box: Box, segments: int) -> BoxPartition:
    """Equal split with segments >= 1 per axis; total count is capped."""
    if segments < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")
    count = segments ** box.dim
    if count > PARTITION_CAP:
        raise PartitionTooLarge(
            f"{segments}^{box.dim} = {count} sub-boxes exceeds the cap of {PARTITION_CAP}"
        )
    return BoxPartition(box=box, segments=segments)
