"""Range / velocity / angle FFT processing of IF sample cubes.

Conventions, shared by every consumer in the package:

* Range axis: forward FFT of the fast-time samples, no shift; bin m_r holds
  beat frequency m_r * f_s / M_r, i.e. range m_r * f_s * c / (2 * S_w * M_r).
* Velocity axis: forward FFT over chirps then fftshift, so zero Doppler sits
  at bin M_v//2 and v_r(m_v) = (m_v - M_v//2) * lam / (2 * T_c * M_v).
  Positive v_r means the range is opening.
* Angle axis: forward FFT over virtual channels then fftshift, so boresight
  sits at bin M_th//2 and sin(theta) = (m_th - M_th//2) * lam / (h * M_th).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RadarConfig
from .errors import ConfigError
from .synth import IQCube

_WINDOWS = ("rect", "hann")


def _window(name: str, length: int) -> np.ndarray:
    if name == "rect":
        return np.ones(length)
    if name == "hann":
        return np.hanning(length)
    raise ConfigError(f"unknown window {name!r}, expected one of {_WINDOWS}")


def range_fft(samples: np.ndarray, fft_points: int, window: str = "rect") -> np.ndarray:
    """Fast-time FFT: (N_s, N_c, Q) samples to a (M_r, N_c, Q) range map."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 3:
        raise ConfigError("expected a (N_s, N_c, Q) sample cube")
    if fft_points < samples.shape[0]:
        raise ConfigError("range fft_points must be >= samples per chirp")
    w = _window(window, samples.shape[0])
    return np.fft.fft(samples * w[:, None, None], n=fft_points, axis=0)


def velocity_fft(range_map: np.ndarray, fft_points: int) -> np.ndarray:
    """Slow-time FFT with shift: (M_r, N, Q) to (M_r, M_v, Q), zero Doppler centered."""
    range_map = np.asarray(range_map, dtype=np.complex128)
    if range_map.ndim != 3:
        raise ConfigError("expected a (M_r, N_chirps, Q) range map")
    if fft_points < range_map.shape[1]:
        raise ConfigError("velocity fft_points must be >= chirp count")
    spec = np.fft.fft(range_map, n=fft_points, axis=1)
    return np.fft.fftshift(spec, axes=1)


def tdm_phase_per_chirp(velocity_bin: int, fft_points: int) -> float:
    """Per-chirp Doppler phase increment (rad) represented by a shifted velocity bin."""
    return 2.0 * np.pi * (velocity_bin - fft_points // 2) / fft_points


def tdm_compensate(rv_map: np.ndarray, cfg: RadarConfig) -> np.ndarray:
    """Remove the transmit-slot motion phase from a shifted range-velocity map.

    Channel q of transmit slot t = q // rx_count lags the first slot by
    t/tx_count of a chirp, so it carries the extra phase t*dphi/tx_count where
    dphi is the per-chirp Doppler increment of the channel's velocity bin.
    Returns a corrected copy; shape (M_r, M_v, Q) is preserved.
    """
    rv_map = np.asarray(rv_map, dtype=np.complex128)
    if rv_map.ndim != 3 or rv_map.shape[2] != cfg.virtual_channel_count:
        raise ConfigError("expected a (M_r, M_v, Q) map matching the config")
    m_v = rv_map.shape[1]
    bins = np.arange(m_v)
    dphi = 2.0 * np.pi * (bins - m_v // 2) / m_v  # (M_v,)
    tx_slot = np.arange(cfg.virtual_channel_count) // cfg.rx_count  # (Q,)
    correction = np.exp(-1j * np.outer(dphi, tx_slot / cfg.tx_count))  # (M_v, Q)
    return rv_map * correction[None, :, :]


def tdm_compensate_channels(channels: np.ndarray, velocity_bin: int, fft_points: int,
                            cfg: RadarConfig) -> np.ndarray:
    """Same correction for a single cell's channel vector at a known velocity bin."""
    channels = np.asarray(channels, dtype=np.complex128)
    if channels.shape != (cfg.virtual_channel_count,):
        raise ConfigError("expected one complex value per virtual channel")
    dphi = tdm_phase_per_chirp(velocity_bin, fft_points)
    tx_slot = np.arange(cfg.virtual_channel_count) // cfg.rx_count
    return channels * np.exp(-1j * dphi * tx_slot / cfg.tx_count)


def angle_fft(rv_map: np.ndarray, fft_points: int) -> np.ndarray:
    """Channel-axis FFT with shift: (M_r, M_v, Q) to (M_r, M_v, M_th), boresight centered."""
    rv_map = np.asarray(rv_map, dtype=np.complex128)
    if rv_map.ndim != 3:
        raise ConfigError("expected a (M_r, M_v, Q) map")
    if fft_points < rv_map.shape[2]:
        raise ConfigError("angle fft_points must be >= channel count")
    spec = np.fft.fft(rv_map, n=fft_points, axis=2)
    return np.fft.fftshift(spec, axes=2)


@dataclass
class RvaCube:
    """Range-velocity-angle spectrum of one snapshot, with its start time."""

    data: np.ndarray  # (M_r, M_v, M_th) complex
    t_start: float  # seconds from the start of the run
    frame_index: int = 0
    snapshot_index: int = 0

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.complex128)
        if a.ndim != 3:
            raise ConfigError("data must be (M_r, M_v, M_th)")
        self.data = a


def snapshot_rva(
    cube: IQCube,
    snapshot: int,
    k_chirps: int,
    cfg: RadarConfig,
    m_range: int = 64,
    m_theta: int = 16,
    window: str = "rect",
) -> RvaCube:
    """3D spectrum of one K-chirp slice of a frame.

    Snapshot ``l`` consumes chirps [l*K, (l+1)*K); its start time is
    l*K*T_c + frame*T_f.  The velocity FFT runs at exactly K points, and the
    transmit-slot phase is compensated before the angle FFT.
    """
    ns, nc, nq = cube.samples.shape
    if k_chirps < 1 or k_chirps > nc:
        raise ConfigError("k_chirps must be in [1, chirps_per_frame]")
    per_frame = nc // k_chirps
    if not 0 <= snapshot < per_frame:
        raise ConfigError(f"snapshot {snapshot} outside [0, {per_frame})")
    if nq != cfg.virtual_channel_count:
        raise ConfigError("cube channel count does not match the config")
    chunk = cube.samples[:, snapshot * k_chirps : (snapshot + 1) * k_chirps, :]
    rmap = range_fft(chunk, m_range, window)
    rv = velocity_fft(rmap, k_chirps)
    rv = tdm_compensate(rv, cfg)
    rva = angle_fft(rv, m_theta)
    t0 = snapshot * k_chirps * cfg.chirp_interval_s + cube.frame_index * cfg.frame_interval_s
    return RvaCube(data=rva, t_start=t0, frame_index=cube.frame_index, snapshot_index=snapshot)


def dump_rva(cube: RvaCube, path) -> None:
    """Write an RvaCube: ASCII header ``M_r M_v M_theta t_start`` then little-endian
    float64 re/im pairs with the range index fastest, then velocity, then angle."""
    mr, mv, mt = cube.data.shape
    payload = np.ascontiguousarray(cube.data.transpose(2, 1, 0)).astype("<c16")
    with open(path, "wb") as fh:
        fh.write(f"{mr} {mv} {mt} {cube.t_start!r}\n".encode("ascii"))
        fh.write(payload.tobytes())


def load_rva(path) -> RvaCube:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 4:
            raise ConfigError(f"{path}: bad RVA header")
        mr, mv, mt = (int(x) for x in header[:3])
        t_start = float(header[3])
        flat = np.frombuffer(fh.read(), dtype="<c16")
    if flat.size != mr * mv * mt:
        raise ConfigError(f"{path}: payload size does not match header")
    data = flat.reshape(mt, mv, mr).transpose(2, 1, 0).copy()
    return RvaCube(data=data, t_start=t_start)
