"""Ego-velocity estimation from stationary-target detections.

A stationary reflector at azimuth theta seen from a platform moving with
velocity (v_x, v_y) shows the radial velocity

    v_r = -(sin(theta) * v_x + cos(theta) * v_y)

so a frame's detections give one linear equation each.  Moving targets are
rejected with RANSAC before the least-squares solve, and the per-frame
velocities integrate into the platform track.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .config import RadarConfig
from .errors import ConfigError, DegenerateGeometryError, EstimationFailedError
from .scene import Trajectory

# Angle spreads below this cannot separate v_x from v_y.
MIN_ANGLE_SPREAD_RAD = 1e-6


@dataclass(frozen=True)
class EgoEstimate:
    """One frame's velocity solution."""

    vx_mps: float
    vy_mps: float
    inliers: tuple  # indices into the detection list
    residual_rms: float
    stderr_mps: float  # scalar 1-sigma velocity uncertainty from the fit


def _design_matrix(azimuths: np.ndarray) -> np.ndarray:
    return -np.column_stack([np.sin(azimuths), np.cos(azimuths)])


def solve_velocity(radial_speeds, azimuths) -> EgoEstimate:
    """Least-squares platform velocity from (v_r, theta) pairs.

    Raises DegenerateGeometryError when all azimuths coincide within 1e-6 rad
    and the two velocity components cannot be separated.
    """
    v_r = np.asarray(radial_speeds, dtype=float).ravel()
    theta = np.asarray(azimuths, dtype=float).ravel()
    if v_r.shape != theta.shape or v_r.size < 2:
        raise ConfigError("need at least two (v_r, theta) pairs of equal length")
    if np.ptp(theta) < MIN_ANGLE_SPREAD_RAD:
        raise DegenerateGeometryError("all detections share one azimuth")
    a = _design_matrix(theta)
    solution, _, rank, _ = np.linalg.lstsq(a, v_r, rcond=None)
    if rank < 2:
        raise DegenerateGeometryError("rank-deficient geometry")
    residuals = v_r - a @ solution
    rms = float(np.sqrt(np.mean(residuals**2)))
    # 1-sigma parameter uncertainty from the unbiased residual variance.
    dof = max(v_r.size - 2, 1)
    cov = residuals @ residuals / dof * np.linalg.inv(a.T @ a)
    stderr = float(np.sqrt(np.trace(cov) / 2.0))
    return EgoEstimate(
        vx_mps=float(solution[0]),
        vy_mps=float(solution[1]),
        inliers=tuple(range(v_r.size)),
        residual_rms=rms,
        stderr_mps=stderr,
    )


def ransac_stationary(
    radial_speeds,
    azimuths,
    threshold_mps: float,
    iterations: int = 100,
    seed: int = 0,
) -> EgoEstimate:
    """RANSAC fit that rejects moving targets.

    Two detections are sampled per iteration, solved exactly, and scored by
    how many detections fall within ``threshold_mps`` of the model.  The
    largest consensus set (earliest iteration wins ties) is refit with
    :func:`solve_velocity`.  Sampling is done over azimuth-sorted indices so
    the inlier set does not depend on the detection list order.

    Raises EstimationFailedError when no consensus of at least 2 forms.
    """
    v_r = np.asarray(radial_speeds, dtype=float).ravel()
    theta = np.asarray(azimuths, dtype=float).ravel()
    if v_r.shape != theta.shape or v_r.size < 2:
        raise ConfigError("need at least two (v_r, theta) pairs of equal length")
    if threshold_mps <= 0:
        raise ConfigError("threshold_mps must be positive")
    order = np.lexsort((v_r, theta))  # canonical sampling order
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    rng = np.random.default_rng(seed)

    best_mask = None
    best_count = 0
    for _ in range(iterations):
        pick = order[rng.choice(v_r.size, size=2, replace=False)]
        i, j = int(pick[0]), int(pick[1])
        if abs(theta[i] - theta[j]) < MIN_ANGLE_SPREAD_RAD:
            continue
        # Exact solve of sin(t)*vx + cos(t)*vy = -v_r for the sampled pair.
        det = sin_t[i] * cos_t[j] - sin_t[j] * cos_t[i]
        vx = (-v_r[i] * cos_t[j] + v_r[j] * cos_t[i]) / det
        vy = (v_r[i] * sin_t[j] - v_r[j] * sin_t[i]) / det
        residuals = v_r + sin_t * vx + cos_t * vy
        mask = np.abs(residuals) < threshold_mps
        count = int(mask.sum())
        if count > best_count:
            best_count, best_mask = count, mask
    if best_mask is None or best_count < 2:
        raise EstimationFailedError("no consensus set of size >= 2")
    inliers = np.flatnonzero(best_mask)
    fit = solve_velocity(v_r[inliers], theta[inliers])
    return EgoEstimate(
        vx_mps=fit.vx_mps,
        vy_mps=fit.vy_mps,
        inliers=tuple(int(k) for k in inliers),
        residual_rms=fit.residual_rms,
        stderr_mps=fit.stderr_mps,
    )


@dataclass
class TrajectoryEstimate:
    """Integrated per-frame velocity estimates with their fit diagnostics."""

    trajectory: Trajectory
    estimates: list = field(default_factory=list)

    @property
    def frame_count(self) -> int:
        return self.trajectory.frame_count

    def position(self, cfg: RadarConfig, frame: int, chirp: int = 0) -> np.ndarray:
        return self.trajectory.position(cfg, frame, chirp)

    def frame_start_position(self, cfg: RadarConfig, frame: int) -> np.ndarray:
        return self.trajectory.frame_start_position(cfg, frame)

    def mean_stderr(self) -> float:
        if not self.estimates:
            return float("nan")
        return float(np.mean([e.stderr_mps for e in self.estimates]))


def integrate_trajectory(estimates: list) -> TrajectoryEstimate:
    """Stack per-frame EgoEstimates (frames 0..N-1, no gaps) into a track."""
    if not estimates:
        raise ConfigError("no estimates to integrate")
    velocities = np.array([[e.vx_mps, e.vy_mps] for e in estimates])
    return TrajectoryEstimate(trajectory=Trajectory(velocities), estimates=list(estimates))


def write_trajectory_csv(est: TrajectoryEstimate, cfg: RadarConfig, path) -> None:
    """CSV export: per frame the velocity solution and the frame-start position."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "vx_hat", "vy_hat", "x_start", "y_start", "n_inliers", "residual_rms"])
        for frame, e in enumerate(est.estimates):
            x, y = est.frame_start_position(cfg, frame)
            writer.writerow(
                [
                    frame,
                    f"{e.vx_mps:.12g}",
                    f"{e.vy_mps:.12g}",
                    f"{x:.12g}",
                    f"{y:.12g}",
                    len(e.inliers),
                    f"{e.residual_rms:.12g}",
                ]
            )
