"""Scene content (stationary point reflectors) and platform trajectories.

Global coordinates: the platform starts at the origin, x is along-track,
y is the side-looking boresight.  A reflector at azimuth theta sits at
(x_s + r sin(theta), y_s + r cos(theta)) relative to the radar at (x_s, y_s).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RadarConfig
from .errors import ConfigError


@dataclass(frozen=True)
class PointTarget:
    """A stationary point reflector with a complex reflection coefficient."""

    x_m: float
    y_m: float
    reflectivity: complex = 1.0 + 0.0j


@dataclass
class Scene:
    targets: list = field(default_factory=list)

    def __len__(self):
        return len(self.targets)

    def positions(self) -> np.ndarray:
        """Target positions as an (N, 2) array."""
        return np.array([[t.x_m, t.y_m] for t in self.targets], dtype=float).reshape(-1, 2)

    def reflectivities(self) -> np.ndarray:
        return np.array([t.reflectivity for t in self.targets], dtype=np.complex128)


def rectangle_outline(
    center_x: float, center_y: float, width: float, height: float, spacing: float = 0.2
) -> list:
    """Point reflectors along a rectangle outline, roughly ``spacing`` apart.

    Corners are always included once; each side is subdivided evenly so the
    point count is deterministic.  Used to build extended objects such as
    parked cars out of point scatterers.
    """
    if width <= 0 or height <= 0 or spacing <= 0:
        raise ConfigError("rectangle dimensions and spacing must be positive")
    x0, x1 = center_x - width / 2.0, center_x + width / 2.0
    y0, y1 = center_y - height / 2.0, center_y + height / 2.0
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    points = []
    for (ax, ay), (bx, by) in zip(corners, corners[1:] + corners[:1]):
        side = float(np.hypot(bx - ax, by - ay))
        steps = max(1, int(round(side / spacing)))
        for k in range(steps):  # endpoint belongs to the next side
            f = k / steps
            points.append(PointTarget(ax + f * (bx - ax), ay + f * (by - ay)))
    return points


@dataclass
class Trajectory:
    """Piecewise-constant per-frame platform velocity, starting at the origin.

    Chirps occupy the head of each frame; the platform keeps moving through
    the idle tail, so the start of frame p is the full-frame integral
    sum_{u<p} v_u * T_f and chirp n adds v_p * n * T_c on top.
    """

    velocities: np.ndarray  # (frames, 2) m/s

    def __post_init__(self):
        v = np.asarray(self.velocities, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 1:
            raise ConfigError("velocities must be a (frames, 2) array")
        self.velocities = v

    @property
    def frame_count(self) -> int:
        return self.velocities.shape[0]

    def max_speed(self) -> float:
        return float(np.max(np.hypot(self.velocities[:, 0], self.velocities[:, 1])))

    def frame_start_position(self, cfg: RadarConfig, frame: int) -> np.ndarray:
        """Platform position at the first chirp of ``frame`` (frame_count allowed)."""
        if not 0 <= frame <= self.frame_count:
            raise ConfigError(f"frame {frame} outside trajectory of {self.frame_count} frames")
        return self.velocities[:frame].sum(axis=0) * cfg.frame_interval_s

    def position(self, cfg: RadarConfig, frame: int, chirp: int = 0) -> np.ndarray:
        """Platform position at chirp ``chirp`` of frame ``frame``."""
        if not 0 <= frame < self.frame_count:
            raise ConfigError(f"frame {frame} outside trajectory of {self.frame_count} frames")
        if chirp < 0:
            raise ConfigError("chirp must be >= 0")
        start = self.frame_start_position(cfg, frame)
        return start + self.velocities[frame] * (chirp * cfg.chirp_interval_s)


def load_scene(path) -> Scene:
    """Read a scene file: one ``x_m y_m [reflect_re reflect_im]`` line per target."""
    targets = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 4):
                raise ConfigError(f"{path}:{lineno}: expected 2 or 4 columns")
            try:
                nums = [float(p) for p in parts]
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: non-numeric value") from exc
            refl = complex(nums[2], nums[3]) if len(nums) == 4 else 1.0 + 0.0j
            targets.append(PointTarget(nums[0], nums[1], refl))
    return Scene(targets)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for t in scene.targets:
            r = complex(t.reflectivity)
            x, y = float(t.x_m), float(t.y_m)
            if r == 1.0 + 0.0j:
                fh.write(f"{x!r} {y!r}\n")
            else:
                fh.write(f"{x!r} {y!r} {r.real!r} {r.imag!r}\n")


def load_trajectory(path) -> Trajectory:
    """Read a trajectory file: one ``vx_mps vy_mps`` line per frame."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 2 columns")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: non-numeric value") from exc
    if not rows:
        raise ConfigError(f"{path}: empty trajectory")
    return Trajectory(np.array(rows))


def save_trajectory(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for vx, vy in traj.velocities:
            fh.write(f"{float(vx)!r} {float(vy)!r}\n")


def constant_trajectory(vx: float, vy: float, frames: int) -> Trajectory:
    return Trajectory(np.tile([float(vx), float(vy)], (frames, 1)))
