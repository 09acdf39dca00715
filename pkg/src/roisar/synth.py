"""De-chirped IF sample synthesis for a TDM virtual array on a moving platform.

Sample (i, n, q) of one frame carries the phase

    2*pi * (S_w*tau_n*i/f_s + f_c*tau_n - S_w*tau_n^2/2 + q*h*sin(theta_n)/lam)

where tau_n is the two-way delay linearized per frame around the chirp-0
geometry, tau_n = tau_0 + 2*rdot*n*T_c/c, with rdot the range rate (negative
while closing).  Channels fed by a later transmit slot pick up the extra
motion phase t/tx_count of the per-chirp Doppler increment; the spectral
stage removes it again after the velocity FFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0

from .config import RadarConfig
from .errors import ConfigError
from .scene import Scene, Trajectory

# Targets closer than this to the platform make the geometry singular.
MIN_TARGET_RANGE_M = 1e-6


@dataclass
class IQCube:
    """One frame of complex IF samples, indexed [sample i, chirp n, virtual rx q]."""

    samples: np.ndarray
    frame_index: int
    noise_power: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=np.complex128)
        if a.ndim != 3:
            raise ConfigError("samples must be (N_s, N_c, N_vrx)")
        self.samples = a

    @property
    def shape(self):
        return self.samples.shape


def _noise_rng(seed: int, frame_index: int) -> np.random.Generator:
    # One independent stream per (seed, frame) so frames can be synthesized
    # in any order with identical results.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(frame_index,)))


def synthesize_frame(
    scene: Scene,
    trajectory: Trajectory,
    cfg: RadarConfig,
    frame: int,
    noise_power: float = 0.0,
    seed: int = 0,
) -> IQCube:
    """Simulate one frame of IF samples for every virtual channel.

    Args:
        scene: stationary point reflectors in global coordinates.
        trajectory: per-frame platform velocities.
        cfg: radar configuration.
        frame: frame index into the trajectory.
        noise_power: per-sample variance of circular complex Gaussian noise.
        seed: RNG seed; the noise stream is derived from (seed, frame).

    Returns:
        IQCube of shape (samples_per_chirp, chirps_per_frame, virtual channels).
    """
    if noise_power < 0:
        raise ConfigError("noise_power must be >= 0")
    if len(scene) == 0 and noise_power == 0.0:
        raise ConfigError("empty scene with zero noise produces no signal")

    ns, nc, nq = cfg.samples_per_chirp, cfg.chirps_per_frame, cfg.virtual_channel_count
    lam = cfg.wavelength_m
    amp = cfg.tx_amplitude * cfg.rx_amplitude / 2.0

    i_idx = np.arange(ns, dtype=float)[:, None, None]
    q_idx = np.arange(nq, dtype=float)[None, None, :]
    tx_slot = (np.arange(nq) // cfg.rx_count).astype(float)[None, None, :]

    pos0 = trajectory.position(cfg, frame, 0)
    vel = trajectory.velocities[frame]
    chirp_t = np.arange(nc, dtype=float) * cfg.chirp_interval_s
    radar_xy = pos0[None, :] + vel[None, :] * chirp_t[:, None]  # (N_c, 2)

    cube = np.zeros((ns, nc, nq), dtype=np.complex128)
    for target in scene.targets:
        rel0 = np.array([target.x_m, target.y_m]) - pos0
        r0 = float(np.hypot(rel0[0], rel0[1]))
        if r0 < MIN_TARGET_RANGE_M:
            raise ConfigError(f"target at {target.x_m, target.y_m} coincides with the platform")
        rdot = -float(np.dot(vel, rel0 / r0))  # range rate, <0 while closing
        tau = (2.0 / C0) * (r0 + rdot * chirp_t)  # (N_c,)

        # Azimuth follows the true per-chirp geometry, not the linearization.
        dx = target.x_m - radar_xy[:, 0]
        dy = target.y_m - radar_xy[:, 1]
        rng_n = np.hypot(dx, dy)
        if np.min(rng_n) < MIN_TARGET_RANGE_M:
            raise ConfigError(f"target at {target.x_m, target.y_m} crosses the platform")
        sin_theta = dx / rng_n  # (N_c,)

        tau_b = tau[None, :, None]
        phase = (
            cfg.sweep_slope_hz_per_s * tau_b * i_idx / cfg.sampling_rate_sps
            + cfg.carrier_frequency_hz * tau_b
            - 0.5 * cfg.sweep_slope_hz_per_s * tau_b * tau_b
            + q_idx * cfg.channel_spacing_m * sin_theta[None, :, None] / lam
        )
        # Later transmit slots sample the target a fraction of T_c later; with
        # frame-constant range rate that is a pure extra phase per channel.
        doppler_inc = 2.0 * rdot * cfg.chirp_interval_s / lam  # cycles per chirp
        phase = phase + tx_slot * doppler_inc / cfg.tx_count
        cube += (amp * target.reflectivity) * np.exp(2j * np.pi * phase)

    if noise_power > 0.0:
        rng = _noise_rng(seed, frame)
        scale = np.sqrt(noise_power / 2.0)
        cube += scale * (
            rng.standard_normal(cube.shape) + 1j * rng.standard_normal(cube.shape)
        )
    return IQCube(samples=cube, frame_index=frame, noise_power=noise_power)


def dump_iq_cube(cube: IQCube, path) -> None:
    """Write an IQCube: ASCII header ``N_s N_c N_vrx frame`` then little-endian
    float64 re/im pairs with the sample index fastest, then chirp, then channel."""
    ns, nc, nq = cube.samples.shape
    payload = np.ascontiguousarray(cube.samples.transpose(2, 1, 0)).astype("<c16")
    with open(path, "wb") as fh:
        fh.write(f"{ns} {nc} {nq} {cube.frame_index}\n".encode("ascii"))
        fh.write(payload.tobytes())


def load_iq_cube(path) -> IQCube:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 4:
            raise ConfigError(f"{path}: bad IQ cube header")
        ns, nc, nq, frame = (int(x) for x in header)
        flat = np.frombuffer(fh.read(), dtype="<c16")
    if flat.size != ns * nc * nq:
        raise ConfigError(f"{path}: payload size does not match header")
    samples = flat.reshape(nq, nc, ns).transpose(2, 1, 0).copy()
    return IQCube(samples=samples, frame_index=frame)
