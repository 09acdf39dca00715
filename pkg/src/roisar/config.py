"""Radar waveform configuration and closed-form performance limits.

All quantities are SI (Hz, s, m, m/s, rad) unless a field name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from scipy.constants import c as C0

from .errors import ConfigError

# Integer-valued RadarConfig fields; everything else parses as float.
_INT_FIELDS = {"samples_per_chirp", "chirps_per_frame", "tx_count", "rx_count"}


@dataclass(frozen=True)
class RadarConfig:
    """Fast-chirp FMCW waveform and TDM virtual-array geometry.

    ``chirp_interval_s`` is the full repetition interval of one virtual-array
    cycle: with time-multiplexed transmitters it already contains ``tx_count``
    transmit slots.  ``initial_phase_rad`` is carried for completeness only;
    it cancels in de-chirp mixing and never reaches the IF samples.
    """

    carrier_frequency_hz: float = 77e9
    sweep_bandwidth_hz: float = 335e6
    sweep_slope_hz_per_s: float = 21e6 / 1e-6  # 21 MHz/us
    sampling_rate_sps: float = 4e6
    samples_per_chirp: int = 64
    chirps_per_frame: int = 255
    chirp_interval_s: float = 90e-6
    frame_interval_s: float = 33.3e-3
    tx_count: int = 2
    rx_count: int = 4
    channel_spacing_m: float = C0 / 77e9 / 2  # half wavelength
    initial_phase_rad: float = 0.0
    tx_amplitude: float = 1.0
    rx_amplitude: float = 1.0

    def __post_init__(self):
        for name in (
            "carrier_frequency_hz",
            "sweep_bandwidth_hz",
            "sweep_slope_hz_per_s",
            "sampling_rate_sps",
            "chirp_interval_s",
            "frame_interval_s",
            "channel_spacing_m",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("samples_per_chirp", "chirps_per_frame", "tx_count", "rx_count"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.tx_amplitude <= 0 or self.rx_amplitude <= 0:
            raise ConfigError("amplitudes must be positive")
        # ADC window must fit inside one chirp interval.
        if self.samples_per_chirp / self.sampling_rate_sps > self.chirp_interval_s:
            raise ConfigError("sampling window exceeds chirp interval")
        # Swept frequency at the last ADC sample must stay inside the bandwidth.
        swept = self.sweep_slope_hz_per_s * (self.samples_per_chirp - 1) / self.sampling_rate_sps
        if swept > self.sweep_bandwidth_hz:
            raise ConfigError("sampled sweep exceeds bandwidth")
        if self.chirps_per_frame * self.chirp_interval_s > self.frame_interval_s:
            raise ConfigError("chirping does not fit in the frame interval")

    @property
    def wavelength_m(self) -> float:
        return C0 / self.carrier_frequency_hz

    @property
    def virtual_channel_count(self) -> int:
        return self.tx_count * self.rx_count

    @property
    def frame_rate_hz(self) -> float:
        return 1.0 / self.frame_interval_s


@dataclass(frozen=True)
class DerivedLimits:
    """Resolution and unambiguous limits implied by a RadarConfig."""

    range_resolution_m: float
    velocity_resolution_mps: float
    angle_resolution_rad: float
    max_range_m: float
    max_velocity_mps: float
    max_angle_rad: float


def derive_limits(cfg: RadarConfig) -> DerivedLimits:
    """Closed-form resolution and maximum-unambiguous limits.

    The angle resolution is the boresight beamwidth of the full virtual
    array.  ``max_angle_rad`` saturates at 90 deg once the channel spacing
    is at or below half a wavelength.
    """
    lam = cfg.wavelength_m
    sin_limit = min(1.0, lam / (2.0 * cfg.channel_spacing_m))
    return DerivedLimits(
        range_resolution_m=C0 / (2.0 * cfg.sweep_bandwidth_hz),
        velocity_resolution_mps=lam / (2.0 * cfg.chirps_per_frame * cfg.chirp_interval_s),
        angle_resolution_rad=lam / (cfg.virtual_channel_count * cfg.channel_spacing_m),
        max_range_m=cfg.sampling_rate_sps * C0 / (2.0 * cfg.sweep_slope_hz_per_s),
        max_velocity_mps=lam / (4.0 * cfg.chirp_interval_s),
        max_angle_rad=math.asin(sin_limit),
    )


def max_platform_speed(cfg: RadarConfig, k_chirps: int, scope_rad: float) -> float:
    """Fastest platform speed for which snapshot spacing samples the scene.

    An image updated once every ``k_chirps`` chirps observes an angular scope
    of ``scope_rad``; the platform displacement per update must stay below
    half the finest spatial period seen across that scope.

    Args:
        cfg: radar configuration.
        k_chirps: chirps consumed per image update.
        scope_rad: angular scope of the imaged region, in (0, pi].

    Returns:
        Maximum admissible speed in m/s.
    """
    if k_chirps < 1:
        raise ConfigError("k_chirps must be >= 1")
    if not 0.0 < scope_rad <= math.pi:
        raise ConfigError("scope_rad must lie in (0, pi]")
    update_rate = 1.0 / (k_chirps * cfg.chirp_interval_s)
    return cfg.wavelength_m / (2.0 * math.sin(scope_rad / 2.0)) * update_rate


def expected_position_drift(sigma_mps: float, frame_interval_s: float, frame_count: int) -> float:
    """Mean absolute radial drift after integrating noisy per-frame velocities.

    Per-frame velocity errors are i.i.d. N(0, sigma^2) per axis, so the
    radial projection of the accumulated position error is zero-mean normal
    with std sigma*T_f*sqrt(p); its absolute value has the folded-normal mean
    sqrt(2 p / pi) * sigma * T_f.
    """
    if frame_count < 0:
        raise ConfigError("frame_count must be >= 0")
    return math.sqrt(2.0 * frame_count / math.pi) * sigma_mps * frame_interval_s


@dataclass(frozen=True)
class CoherentIntervalBound:
    """How many frames can be combined before odometry drift defocuses."""

    frames: float
    frames_int: int


def coherent_interval_frames(
    cfg: RadarConfig, sigma_mps: float, phase_threshold_rad: float = math.pi / 2.0
) -> CoherentIntervalBound:
    """Largest frame count whose expected drift phase stays under threshold.

    Inverts the folded-normal drift mean: the two-way phase error
    4*pi*f_c*drift/c reaches ``phase_threshold_rad`` after
    (1/2pi) * (c*phi / (4*f_c*sigma*T_f))^2 frames.  The integer form uses
    round-half-up on the real value.
    """
    if sigma_mps <= 0:
        raise ConfigError("sigma_mps must be positive")
    if phase_threshold_rad <= 0:
        raise ConfigError("phase_threshold_rad must be positive")
    ratio = C0 * phase_threshold_rad / (
        4.0 * cfg.carrier_frequency_hz * sigma_mps * cfg.frame_interval_s
    )
    frames = ratio * ratio / (2.0 * math.pi)
    return CoherentIntervalBound(frames=frames, frames_int=int(math.floor(frames + 0.5)))


def short_range_77ghz_config() -> RadarConfig:
    """The default 77 GHz short-range profile used by the examples and tests."""
    return RadarConfig()


def load_radar_config(path) -> RadarConfig:
    """Parse a flat key=value config file.

    Keys must exactly match RadarConfig field names; unknown or repeated keys
    are errors, missing keys fall back to the defaults.
    """
    known = {f.name for f in fields(RadarConfig)}
    values = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: repeated key {key!r}")
            try:
                values[key] = int(text) if key in _INT_FIELDS else float(text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {text!r}") from exc
    return RadarConfig(**values)


def write_radar_config(cfg: RadarConfig, path) -> None:
    """Write a config as key=value lines, full float precision."""
    with open(path, "w", encoding="ascii") as fh:
        for f in fields(RadarConfig):
            value = getattr(cfg, f.name)
            if f.name in _INT_FIELDS:
                fh.write(f"{f.name} = {int(value)}\n")
            else:
                fh.write(f"{f.name} = {value!r}\n")
