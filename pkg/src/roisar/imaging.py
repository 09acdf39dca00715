"""Detection-gated backprojection imaging and the reference methods it is
compared against.

The imaged plane is a fixed global grid: pixel (k_x, k_y) sits at
(k_x * pitch_x, k_y * pitch_y).  Each snapshot's range-velocity-angle
spectrum is looked up per pixel (velocity bin by argmax), matched-filtered
with the two-way carrier phase of the pixel distance, and accumulated.
The angle-bin lookup uses the signed along-track offset from platform to
pixel, which is the convention pinned by the end-to-end two-target test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0

from . import kernels
from .config import RadarConfig
from .errors import ConfigError
from .flops import COMPLEX_ADD, COMPLEX_MUL, FlopTally
from .scene import Trajectory
from .spectral import angle_fft, range_fft, snapshot_rva
from .synth import IQCube

# Inclusion of pixels whose center lands exactly on a region edge must not
# depend on rounding noise; expand intervals by this relative epsilon.
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class SarParams:
    """Image formation parameters."""

    k_chirps: int = 20  # chirps per snapshot
    pitch_x_m: float = 0.01
    pitch_y_m: float = 0.1
    depth_m: float = 0.9  # range extent of each region rectangle
    scope_rad: float = math.radians(5.0)  # angular scope of each rectangle
    m_range: int = 64
    m_theta: int = 16
    window: str = "rect"

    def __post_init__(self):
        if self.k_chirps < 1:
            raise ConfigError("k_chirps must be >= 1")
        if self.pitch_x_m <= 0 or self.pitch_y_m <= 0:
            raise ConfigError("pixel pitches must be positive")
        if self.depth_m <= 0 or not 0 < self.scope_rad <= math.pi:
            raise ConfigError("depth_m must be positive and scope_rad in (0, pi]")


def pixel_geometry(radar_xy, pixel_xy):
    """Distance and look angle from the platform to a pixel.

    The angle follows asin((x_radar - x_pixel) / d); note the image
    formation itself keys its angle-bin lookup off the opposite-signed
    offset, see :func:`angle_bin_of`.
    """
    dx = radar_xy[0] - pixel_xy[0]
    dy = radar_xy[1] - pixel_xy[1]
    d = math.hypot(dx, dy)
    if d <= 0.0:
        raise ConfigError("pixel coincides with the platform")
    return d, math.asin(max(-1.0, min(1.0, dx / d)))


def range_scale(cfg: RadarConfig, m_range: int) -> float:
    """Distance-to-range-bin factor: m_r = floor(range_scale * d)."""
    return 2.0 * m_range * cfg.sweep_slope_hz_per_s / (C0 * cfg.sampling_rate_sps)


def angle_scale(cfg: RadarConfig, m_theta: int) -> float:
    """sin(theta)-to-angle-bin factor: m_th = M_th//2 + floor(angle_scale * dx/d)."""
    return m_theta * cfg.channel_spacing_m / cfg.wavelength_m


def phase_scale(cfg: RadarConfig) -> float:
    """Distance-to-two-way-carrier-phase factor 4*pi*f_c/c."""
    return 4.0 * math.pi * cfg.carrier_frequency_hz / C0


def range_bin_of(distance: float, cfg: RadarConfig, m_range: int):
    """Range bin of a pixel distance, or None when it falls off the map."""
    b = int(math.floor(range_scale(cfg, m_range) * distance))
    return b if 0 <= b < m_range else None


def angle_bin_of(x_offset: float, distance: float, cfg: RadarConfig, m_theta: int):
    """Angle bin for a signed along-track offset x_pixel - x_radar."""
    b = m_theta // 2 + int(math.floor(angle_scale(cfg, m_theta) * x_offset / distance))
    return b if 0 <= b < m_theta else None


def matched_filter(distance: float, cfg: RadarConfig) -> complex:
    """Unit-modulus reference return exp(j*4*pi*f_c*d/c) of a pixel distance."""
    return complex(np.exp(1j * phase_scale(cfg) * distance))


def lookup_measurement(rva: np.ndarray, distance: float, x_offset: float, cfg: RadarConfig):
    """Spectrum value a pixel maps to, or None when either bin clips.

    The velocity bin is the per-(range, angle) magnitude argmax, so platform
    motion does not have to be known at lookup time.
    """
    m_r, _, m_t = rva.shape
    rbin = range_bin_of(distance, cfg, m_r)
    tbin = angle_bin_of(x_offset, distance, cfg, m_t)
    if rbin is None or tbin is None:
        return None
    spectra = rva[rbin, :, tbin]
    vbin = int(np.argmax(spectra.real**2 + spectra.imag**2))
    return complex(spectra[vbin]), (rbin, vbin, tbin)


@dataclass(frozen=True)
class Roi:
    """Union of axis-aligned rectangles (x0, x1, y0, y1) in global meters."""

    rects: tuple

    def __post_init__(self):
        for x0, x1, y0, y1 in self.rects:
            if x1 < x0 or y1 < y0:
                raise ConfigError("rectangle with negative extent")

    @property
    def empty(self) -> bool:
        return len(self.rects) == 0

    def bounding_box(self):
        xs0, xs1, ys0, ys1 = zip(*self.rects)
        return min(xs0), max(xs1), min(ys0), max(ys1)


def build_roi(detections, radar_xy, depth_m: float, scope_rad: float) -> Roi:
    """One rectangle per detection, centered on its global position.

    Width spans the angular scope at the detection range, height spans
    ``depth_m``; the union of rectangles is imaged.
    """
    if depth_m <= 0 or not 0 < scope_rad <= math.pi:
        raise ConfigError("depth_m must be positive and scope_rad in (0, pi]")
    rects = []
    for det in detections:
        cx = radar_xy[0] + det.range_m * math.sin(det.azimuth_rad)
        cy = radar_xy[1] + det.range_m * math.cos(det.azimuth_rad)
        half_w = det.range_m * scope_rad / 2.0
        half_h = depth_m / 2.0
        rects.append((cx - half_w, cx + half_w, cy - half_h, cy + half_h))
    return Roi(rects=tuple(rects))


@dataclass
class SarImage:
    """Complex image on the global pixel grid.

    ``data[i, j]`` is pixel (kx0 + i, ky0 + j); ``mask`` marks pixels inside
    the imaged region, everything else stays exactly zero.
    """

    data: np.ndarray
    mask: np.ndarray
    kx0: int
    ky0: int
    pitch_x_m: float
    pitch_y_m: float
    snapshots: int = 0
    skipped_lookups: int = 0
    _ix: np.ndarray = field(default=None, repr=False)
    _iy: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)
        if self.data.shape != self.mask.shape or self.data.ndim != 2:
            raise ConfigError("data and mask must be equal 2D shapes")
        active = np.argwhere(self.mask)
        self._ix = np.ascontiguousarray(active[:, 0], dtype=np.int64)
        self._iy = np.ascontiguousarray(active[:, 1], dtype=np.int64)

    @property
    def active_count(self) -> int:
        return int(self._ix.size)

    def x_coords(self) -> np.ndarray:
        return (self.kx0 + np.arange(self.data.shape[0])) * self.pitch_x_m

    def y_coords(self) -> np.ndarray:
        return (self.ky0 + np.arange(self.data.shape[1])) * self.pitch_y_m

    def pixel_position(self, i: int, j: int):
        return (self.kx0 + i) * self.pitch_x_m, (self.ky0 + j) * self.pitch_y_m

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)


def _index_span(lo: float, hi: float, pitch: float):
    eps = _EDGE_EPS * max(1.0, abs(lo) / pitch, abs(hi) / pitch)
    k0 = int(math.ceil(lo / pitch - eps))
    k1 = int(math.floor(hi / pitch + eps))
    return k0, k1


def image_from_roi(roi: Roi, pitch_x: float, pitch_y: float) -> SarImage:
    """Allocate the image grid covering a region union; pixels outside stay masked."""
    if roi.empty:
        # Keep exports valid: an empty region becomes a single masked pixel.
        return SarImage(
            data=np.zeros((1, 1), dtype=np.complex128),
            mask=np.zeros((1, 1), dtype=bool),
            kx0=0,
            ky0=0,
            pitch_x_m=pitch_x,
            pitch_y_m=pitch_y,
        )
    x0, x1, y0, y1 = roi.bounding_box()
    kx0, kx1 = _index_span(x0, x1, pitch_x)
    ky0, ky1 = _index_span(y0, y1, pitch_y)
    nx, ny = max(0, kx1 - kx0 + 1), max(0, ky1 - ky0 + 1)
    mask = np.zeros((nx, ny), dtype=bool)
    for rx0, rx1, ry0, ry1 in roi.rects:
        a0, a1 = _index_span(rx0, rx1, pitch_x)
        b0, b1 = _index_span(ry0, ry1, pitch_y)
        a0, a1 = max(a0, kx0), min(a1, kx1)
        b0, b1 = max(b0, ky0), min(b1, ky1)
        if a0 <= a1 and b0 <= b1:
            mask[a0 - kx0 : a1 - kx0 + 1, b0 - ky0 : b1 - ky0 + 1] = True
    return SarImage(
        data=np.zeros((nx, ny), dtype=np.complex128),
        mask=mask,
        kx0=kx0,
        ky0=ky0,
        pitch_x_m=pitch_x,
        pitch_y_m=pitch_y,
    )


def plane_image(bounds, pitch_x: float, pitch_y: float) -> SarImage:
    """Fully active rectangular image plane (x0, x1, y0, y1)."""
    return image_from_roi(Roi(rects=(tuple(bounds),)), pitch_x, pitch_y)


def accumulate_snapshot(image: SarImage, rva, radar_xy, cfg: RadarConfig, tally=None) -> int:
    """Backproject one snapshot spectrum into the image (in place)."""
    data = np.ascontiguousarray(rva.data) if hasattr(rva, "data") else np.ascontiguousarray(rva)
    m_r, _, m_t = data.shape
    skipped = kernels.accumulate_rva(
        image.data,
        image._ix,
        image._iy,
        image.kx0,
        image.ky0,
        image.pitch_x_m,
        image.pitch_y_m,
        float(radar_xy[0]),
        float(radar_xy[1]),
        data,
        range_scale(cfg, m_r),
        angle_scale(cfg, m_t),
        phase_scale(cfg),
    )
    image.snapshots += 1
    image.skipped_lookups += int(skipped)
    if tally is not None:
        updated = image.active_count - int(skipped)
        tally.add("sar.backprojection", updated * (COMPLEX_MUL + COMPLEX_ADD))
    return int(skipped)


def image_region(
    frames,
    detections,
    trajectory,
    cfg: RadarConfig,
    params: SarParams = SarParams(),
    tally: FlopTally = None,
):
    """Detection-gated image formation over a sequence of frames.

    Args:
        frames: iterable of IQCube, one per trajectory frame; the detections
            must come from the first of them.
        detections: Detection list that seeds the imaged region.
        trajectory: object with position(cfg, frame, chirp), true or estimated.
        cfg: radar configuration.
        params: image formation parameters.
        tally: optional FlopTally to accumulate into.

    Returns:
        (SarImage, FlopTally) with per-stage flop counts for the image chain.
    """
    frames = list(frames)
    if not frames:
        raise ConfigError("no frames to image")
    if tally is None:
        tally = FlopTally()
    det_pos = trajectory.position(cfg, frames[0].frame_index, 0)
    roi = build_roi(detections, det_pos, params.depth_m, params.scope_rad)
    image = image_from_roi(roi, params.pitch_x_m, params.pitch_y_m)
    if image.active_count == 0:
        return image, tally

    q = cfg.virtual_channel_count
    k = params.k_chirps
    tx_extra = q - q // cfg.tx_count  # channels needing slot compensation
    for cube in frames:
        per_frame = cube.samples.shape[1] // k
        for snap in range(per_frame):
            rva = snapshot_rva(cube, snap, k, cfg, params.m_range, params.m_theta, params.window)
            pos = trajectory.position(cfg, cube.frame_index, snap * k)
            accumulate_snapshot(image, rva, pos, cfg, tally)
            tally.add_fft("sar.range_fft", params.m_range, k * q)
            tally.add_fft("sar.velocity_fft", k, params.m_range * q)
            tally.add_cmul("sar.tdm", params.m_range * k * tx_extra)
            tally.add_fft("sar.angle_fft", params.m_theta, params.m_range * k)
    return image, tally


def baseline_backprojection(
    frames,
    trajectory,
    cfg: RadarConfig,
    bounds,
    pitch_x: float,
    pitch_y: float,
    m_range: int = 64,
    rx_channel: int = 0,
    window: str = "rect",
    tally: FlopTally = None,
):
    """Classic per-chirp time-domain backprojection over a full plane.

    Uses a single receive channel; every chirp's range profile is looked up
    and matched-filter accumulated at every pixel of ``bounds``.
    """
    frames = list(frames)
    if not frames:
        raise ConfigError("no frames to image")
    if tally is None:
        tally = FlopTally()
    image = plane_image(bounds, pitch_x, pitch_y)
    rscale = range_scale(cfg, m_range)
    pscale = phase_scale(cfg)
    for cube in frames:
        if not 0 <= rx_channel < cube.samples.shape[2]:
            raise ConfigError("rx_channel outside the cube")
        profiles = range_fft(cube.samples[:, :, rx_channel : rx_channel + 1], m_range, window)[:, :, 0]
        profiles = np.ascontiguousarray(profiles.T)  # (N_c, M_r), row per chirp
        n_chirps = profiles.shape[0]
        tally.add_fft("baseline.range_fft", m_range, n_chirps)
        for n in range(n_chirps):
            pos = trajectory.position(cfg, cube.frame_index, n)
            skipped = kernels.accumulate_profile(
                image.data,
                image._ix,
                image._iy,
                image.kx0,
                image.ky0,
                image.pitch_x_m,
                image.pitch_y_m,
                float(pos[0]),
                float(pos[1]),
                profiles[n],
                rscale,
                pscale,
            )
            image.snapshots += 1
            image.skipped_lookups += int(skipped)
            updated = image.active_count - int(skipped)
            tally.add("baseline.backprojection", updated * (COMPLEX_MUL + COMPLEX_ADD))
    return image, tally


def range_angle_image(
    cube: IQCube,
    cfg: RadarConfig,
    m_range: int = 64,
    m_theta: int = 128,
    window: str = "rect",
    tally: FlopTally = None,
):
    """Conventional single-frame range-angle map, chirp-averaged magnitude.

    No transmit-slot compensation is applied; this reproduces the plain
    FFT-based imaging the detection-gated method is compared against.
    """
    if tally is None:
        tally = FlopTally()
    rmap = range_fft(cube.samples, m_range, window)
    spectrum = angle_fft(rmap, m_theta)
    magnitude = np.abs(spectrum).mean(axis=1)  # (M_r, M_th)
    n_chirps, q = cube.samples.shape[1], cube.samples.shape[2]
    tally.add_fft("rangeangle.range_fft", m_range, n_chirps * q)
    tally.add_fft("rangeangle.angle_fft", m_theta, n_chirps * m_range)
    tally.add_radd("rangeangle.average", m_range * m_theta * (n_chirps - 1))
    return magnitude, tally


def find_image_peaks(magnitude: np.ndarray, count: int = 2, threshold: float = 0.0) -> list:
    """Local maxima of a 2D magnitude map, strongest first.

    A cell qualifies when strictly greater than every in-map 8-neighbor
    (ties resolved toward the lexicographically smaller index) and above
    ``threshold``.
    """
    mag = np.asarray(magnitude, dtype=float)
    nr, nc = mag.shape
    peaks = []
    for i in range(nr):
        for j in range(nc):
            p = mag[i, j]
            if p <= threshold:
                continue
            ok = True
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di == 0 and dj == 0:
                        continue
                    ni, nj = i + di, j + dj
                    if not (0 <= ni < nr and 0 <= nj < nc):
                        continue
                    pn = mag[ni, nj]
                    if pn > p or (pn == p and (ni, nj) < (i, j)):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                peaks.append((p, (i, j)))
    peaks.sort(key=lambda t: (-t[0], t[1]))
    return [idx for _, idx in peaks[:count]]


def write_image_pgm(image: SarImage, path) -> None:
    """8-bit binary PGM of the normalized magnitude, +y up, +x right."""
    mag = image.magnitude()
    peak = mag.max() if mag.size else 0.0
    scaled = np.zeros_like(mag) if peak == 0.0 else mag / peak * 255.0
    # Rows top-to-bottom are decreasing k_y; columns are increasing k_x.
    raster = np.flipud(np.rint(scaled).astype(np.uint8).T)
    ny, nx = raster.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())


def write_image_csv(image: SarImage, path) -> None:
    """Per-pixel complex values: ``kx,ky,re,im`` rows, masked pixels included."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("kx,ky,re,im\n")
        nx, ny = image.data.shape
        for i in range(nx):
            for j in range(ny):
                z = image.data[i, j]
                fh.write(f"{image.kx0 + i},{image.ky0 + j},{z.real:.12g},{z.imag:.12g}\n")


def write_metadata(entries: dict, path) -> None:
    """Flat key=value sidecar; values rendered with repr-level precision."""
    with open(path, "w", encoding="ascii") as fh:
        for key, value in entries.items():
            if isinstance(value, float):
                fh.write(f"{key} = {value!r}\n")
            else:
                fh.write(f"{key} = {value}\n")
