"""Cell-averaging CFAR detection on range-velocity maps and per-detection
angle estimation.

The detector runs on the square of the channel-summed magnitude map.  The
CFAR window is a cross: ``train_cells`` training and ``guard_cells`` guard
cells per side along each axis.  At map edges the window truncates and the
threshold factor is recomputed for the cells actually available, keeping the
per-cell false-alarm rate constant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0
from scipy.ndimage import convolve1d

from .config import RadarConfig
from .errors import ConfigError
from .spectral import range_fft, velocity_fft, angle_fft, tdm_compensate_channels
from .synth import IQCube


@dataclass(frozen=True)
class CfarParams:
    false_alarm_rate: float = 1e-4
    train_cells: int = 8  # per side, per axis
    guard_cells: int = 2  # per side, per axis

    def __post_init__(self):
        if not 0.0 < self.false_alarm_rate < 1.0:
            raise ConfigError("false_alarm_rate must be in (0, 1)")
        if self.train_cells < 1 or self.guard_cells < 0:
            raise ConfigError("need train_cells >= 1 and guard_cells >= 0")


@dataclass(frozen=True)
class Detection:
    """One detected reflector in radar-centric coordinates."""

    range_m: float
    velocity_mps: float  # radial, positive while the range opens
    azimuth_rad: float
    amplitude: float  # non-coherent power at the cell
    range_bin: int
    velocity_bin: int
    angle_bin: int


def threshold_factor(false_alarm_rate: float, train_count: int) -> float:
    """Cell-averaging threshold multiplier alpha = N * (Pfa^(-1/N) - 1)."""
    if train_count < 1:
        raise ConfigError("train_count must be >= 1")
    return train_count * (false_alarm_rate ** (-1.0 / train_count) - 1.0)


def integrate_noncoherent(rv_map: np.ndarray) -> np.ndarray:
    """Sum of channel magnitudes: (M_r, M_v, Q) to a real (M_r, M_v) map."""
    rv_map = np.asarray(rv_map)
    if rv_map.ndim != 3:
        raise ConfigError("expected a (M_r, M_v, Q) map")
    return np.abs(rv_map).sum(axis=2)


def _cross_sums(power: np.ndarray, params: CfarParams):
    """Training-cell sum and count per cell, cross window, truncated at edges."""
    t, g = params.train_cells, params.guard_cells
    half = t + g
    kernel = np.ones(2 * half + 1)
    kernel[half - g : half + g + 1] = 0.0  # guard cells and the cell itself
    sums = np.zeros_like(power)
    counts = np.zeros_like(power)
    ones = np.ones_like(power)
    for axis in (0, 1):
        sums += convolve1d(power, kernel, axis=axis, mode="constant", cval=0.0)
        counts += convolve1d(ones, kernel, axis=axis, mode="constant", cval=0.0)
    return sums, np.rint(counts).astype(int)


def cfar_2d(power: np.ndarray, params: CfarParams) -> list:
    """Cell-averaging CFAR over a 2D power map.

    Args:
        power: non-negative (M_r, M_v) power map.
        params: window geometry and design false-alarm rate.

    Returns:
        Cell indices (m_r, m_v) that exceed the local threshold, in
        lexicographic order.
    """
    power = np.asarray(power, dtype=float)
    if power.ndim != 2:
        raise ConfigError("expected a 2D power map")
    t, g = params.train_cells, params.guard_cells
    if min(power.shape) <= 2 * (t + g):
        raise ConfigError("power map smaller than the CFAR window")
    sums, counts = _cross_sums(power, params)
    # alpha depends on the per-cell training count, so tabulate it once.
    table = np.zeros(counts.max() + 1)
    for n in np.unique(counts):
        table[n] = threshold_factor(params.false_alarm_rate, int(n))
    alpha = table[counts]
    hits = power > alpha * sums / counts
    return [(int(i), int(j)) for i, j in np.argwhere(hits)]


def peak_group(cells: list, power: np.ndarray) -> list:
    """Keep only detections that dominate their 8-neighborhood.

    A cell survives when every in-map neighbor has strictly lower power, or
    equal power with a lexicographically larger (m_r, m_v) index; that leaves
    one survivor per flat-topped peak.
    """
    power = np.asarray(power, dtype=float)
    nr, nv = power.shape
    kept = []
    for (i, j) in cells:
        p = power[i, j]
        ok = True
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ni, nj = i + di, j + dj
                if not (0 <= ni < nr and 0 <= nj < nv):
                    continue
                pn = power[ni, nj]
                if pn > p or (pn == p and (ni, nj) < (i, j)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            kept.append((i, j))
    return kept


def bin_to_range(range_bin: int, cfg: RadarConfig, m_range: int) -> float:
    return range_bin * cfg.sampling_rate_sps * C0 / (2.0 * cfg.sweep_slope_hz_per_s * m_range)


def bin_to_velocity(velocity_bin: int, cfg: RadarConfig, m_velocity: int) -> float:
    return (velocity_bin - m_velocity // 2) * cfg.wavelength_m / (2.0 * cfg.chirp_interval_s * m_velocity)


def bin_to_sin_theta(angle_bin: int, cfg: RadarConfig, m_theta: int) -> float:
    return (angle_bin - m_theta // 2) * cfg.wavelength_m / (cfg.channel_spacing_m * m_theta)


def estimate_angles(
    cells: list,
    rv_map: np.ndarray,
    power: np.ndarray,
    cfg: RadarConfig,
    m_theta: int = 128,
) -> list:
    """Angle-estimate each detected cell and build Detection records.

    The channel vector at (m_r, m_v) is transmit-slot compensated with the
    cell's own velocity bin, zero-padded to ``m_theta`` points, and the
    shifted FFT argmax gives the azimuth.
    """
    m_velocity = rv_map.shape[1]
    detections = []
    for (i, j) in cells:
        channels = tdm_compensate_channels(rv_map[i, j, :], j, m_velocity, cfg)
        spectrum = np.fft.fftshift(np.fft.fft(channels, n=m_theta))
        k = int(np.argmax(np.abs(spectrum)))
        sin_theta = bin_to_sin_theta(k, cfg, m_theta)
        sin_theta = min(1.0, max(-1.0, sin_theta))
        detections.append(
            Detection(
                range_m=bin_to_range(i, cfg, rv_map.shape[0]),
                velocity_mps=bin_to_velocity(j, cfg, m_velocity),
                azimuth_rad=float(np.arcsin(sin_theta)),
                amplitude=float(power[i, j]),
                range_bin=i,
                velocity_bin=j,
                angle_bin=k,
            )
        )
    return detections


def detect_frame(
    cube: IQCube,
    cfg: RadarConfig,
    params: CfarParams = CfarParams(),
    m_range: int = 64,
    m_velocity: int = 256,
    m_theta: int = 128,
    window: str = "rect",
    tally=None,
) -> list:
    """Full single-frame detection: FFTs, CFAR, grouping, angle estimation."""
    rmap = range_fft(cube.samples, m_range, window)
    rv = velocity_fft(rmap, m_velocity)
    summed = integrate_noncoherent(rv)
    power = summed * summed  # CFAR runs on squared summed magnitude
    hits = cfar_2d(power, params)
    pruned = peak_group(hits, power)
    detections = estimate_angles(pruned, rv, power, cfg, m_theta)
    if tally is not None:
        q = cube.samples.shape[2]
        tally.add_fft("detect.range_fft", m_range, cube.samples.shape[1] * q)
        tally.add_fft("detect.velocity_fft", m_velocity, m_range * q)
        tally.add_radd("detect.integration", power.size * (2 * q - 1))
        tally.add_radd("detect.cfar", power.size * (4 * (params.train_cells) + 3))
        tally.add_cmul("detect.tdm", len(pruned) * q)
        tally.add_fft("detect.angle_fft", m_theta, len(pruned))
    return detections


def write_detections_csv(detections_by_frame: dict, path) -> None:
    """CSV export, one row per detection with its frame index."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "r_m", "v_r_mps", "theta_rad", "amplitude", "m_r", "m_v", "m_theta"])
        for frame in sorted(detections_by_frame):
            for d in detections_by_frame[frame]:
                writer.writerow(
                    [
                        frame,
                        f"{d.range_m:.12g}",
                        f"{d.velocity_mps:.12g}",
                        f"{d.azimuth_rad:.12g}",
                        f"{d.amplitude:.12g}",
                        d.range_bin,
                        d.velocity_bin,
                        d.angle_bin,
                    ]
                )
