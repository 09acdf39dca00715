"""Pure numpy implementations of the image accumulation kernels.

These are the fallback for :mod:`roisar.kernels._accel` and the numerical
reference it is tested against.  Both backends take identical arguments and
mutate ``image`` in place, returning the number of skipped (out-of-map or
zero-range) pixel lookups.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _pixel_geometry(ix, iy, kx0, ky0, dwx, dwy, xs, ys):
    dx = (kx0 + ix) * dwx - xs
    dy = (ky0 + iy) * dwy - ys
    # sqrt(dx^2 + dy^2) rather than hypot: the compiled backend computes this
    # exact expression, and the phase factor amplifies even 1-ulp distance
    # differences.  Scene scales are meters, so over/underflow is not a concern.
    return dx, np.sqrt(dx * dx + dy * dy)


def accumulate_rva(
    image: np.ndarray,
    ix: np.ndarray,
    iy: np.ndarray,
    kx0: int,
    ky0: int,
    dwx: float,
    dwy: float,
    xs: float,
    ys: float,
    rva: np.ndarray,
    range_scale: float,
    angle_scale: float,
    phase_scale: float,
) -> int:
    """Add one snapshot's matched-filtered lookup to the listed pixels.

    Per pixel: distance d and signed along-track offset dx to the platform;
    range bin floor(range_scale*d); angle bin M_th//2 + floor(angle_scale*dx/d);
    velocity bin by spectrum argmax; then image += exp(-1j*phase_scale*d) * value.
    """
    m_r, _, m_t = rva.shape
    dx, d = _pixel_geometry(ix, iy, kx0, ky0, dwx, dwy, xs, ys)
    valid = d > 0.0
    d_safe = np.where(valid, d, 1.0)
    rbin = np.floor(range_scale * d_safe).astype(np.int64)
    tbin = m_t // 2 + np.floor(angle_scale * dx / d_safe).astype(np.int64)
    valid &= (rbin >= 0) & (rbin < m_r) & (tbin >= 0) & (tbin < m_t)
    skipped = int(valid.size - valid.sum())
    if not valid.any():
        return skipped
    rbin_v, tbin_v = rbin[valid], tbin[valid]
    spectra = rva[rbin_v, :, tbin_v]  # (n_valid, M_v)
    power = spectra.real**2 + spectra.imag**2
    vbin = np.argmax(power, axis=1)
    values = spectra[np.arange(len(vbin)), vbin]
    phase = phase_scale * d[valid]
    contrib = (np.cos(phase) - 1j * np.sin(phase)) * values
    image[ix[valid], iy[valid]] += contrib
    return skipped


def accumulate_profile(
    image: np.ndarray,
    ix: np.ndarray,
    iy: np.ndarray,
    kx0: int,
    ky0: int,
    dwx: float,
    dwy: float,
    xs: float,
    ys: float,
    profile: np.ndarray,
    range_scale: float,
    phase_scale: float,
) -> int:
    """Add one chirp's matched-filtered range-profile lookup to the listed pixels."""
    m_r = profile.shape[0]
    _, d = _pixel_geometry(ix, iy, kx0, ky0, dwx, dwy, xs, ys)
    valid = d > 0.0
    d_safe = np.where(valid, d, 1.0)
    rbin = np.floor(range_scale * d_safe).astype(np.int64)
    valid &= (rbin >= 0) & (rbin < m_r)
    skipped = int(valid.size - valid.sum())
    if not valid.any():
        return skipped
    values = profile[rbin[valid]]
    phase = phase_scale * d[valid]
    contrib = (np.cos(phase) - 1j * np.sin(phase)) * values
    image[ix[valid], iy[valid]] += contrib
    return skipped
