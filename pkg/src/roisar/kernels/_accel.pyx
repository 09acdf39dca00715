# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in roisar.kernels.reference.

Same signatures, same semantics: mutate ``image`` in place and return the
number of skipped pixel lookups.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, floor, sin, sqrt

cnp.import_array()

BACKEND = "compiled"


def accumulate_rva(
    cnp.complex128_t[:, ::1] image,
    cnp.int64_t[::1] ix,
    cnp.int64_t[::1] iy,
    long kx0,
    long ky0,
    double dwx,
    double dwy,
    double xs,
    double ys,
    cnp.complex128_t[:, :, ::1] rva,
    double range_scale,
    double angle_scale,
    double phase_scale,
):
    cdef Py_ssize_t m_r = rva.shape[0]
    cdef Py_ssize_t m_v = rva.shape[1]
    cdef Py_ssize_t m_t = rva.shape[2]
    cdef Py_ssize_t half_t = m_t // 2
    cdef Py_ssize_t n = ix.shape[0]
    cdef Py_ssize_t k, v, vbest
    cdef long rbin, tbin
    cdef long skipped = 0
    cdef double dx, dy, d, phase, p, pbest, re, im, cr, ci
    cdef double complex val
    for k in range(n):
        dx = (kx0 + ix[k]) * dwx - xs
        dy = (ky0 + iy[k]) * dwy - ys
        d = sqrt(dx * dx + dy * dy)
        if d <= 0.0:
            skipped += 1
            continue
        rbin = <long>floor(range_scale * d)
        tbin = half_t + <long>floor(angle_scale * dx / d)
        if rbin < 0 or rbin >= m_r or tbin < 0 or tbin >= m_t:
            skipped += 1
            continue
        vbest = 0
        pbest = -1.0
        for v in range(m_v):
            re = rva[rbin, v, tbin].real
            im = rva[rbin, v, tbin].imag
            p = re * re + im * im
            if p > pbest:
                pbest = p
                vbest = v
        val = rva[rbin, vbest, tbin]
        phase = phase_scale * d
        cr = cos(phase)
        ci = -sin(phase)
        image[ix[k], iy[k]] = image[ix[k], iy[k]] + (cr + 1j * ci) * val
    return skipped


def accumulate_profile(
    cnp.complex128_t[:, ::1] image,
    cnp.int64_t[::1] ix,
    cnp.int64_t[::1] iy,
    long kx0,
    long ky0,
    double dwx,
    double dwy,
    double xs,
    double ys,
    cnp.complex128_t[::1] profile,
    double range_scale,
    double phase_scale,
):
    cdef Py_ssize_t m_r = profile.shape[0]
    cdef Py_ssize_t n = ix.shape[0]
    cdef Py_ssize_t k
    cdef long rbin
    cdef long skipped = 0
    cdef double dx, dy, d, phase, cr, ci
    cdef double complex val
    for k in range(n):
        dx = (kx0 + ix[k]) * dwx - xs
        dy = (ky0 + iy[k]) * dwy - ys
        d = sqrt(dx * dx + dy * dy)
        if d <= 0.0:
            skipped += 1
            continue
        rbin = <long>floor(range_scale * d)
        if rbin < 0 or rbin >= m_r:
            skipped += 1
            continue
        val = profile[rbin]
        phase = phase_scale * d
        cr = cos(phase)
        ci = -sin(phase)
        image[ix[k], iy[k]] = image[ix[k], iy[k]] + (cr + 1j * ci) * val
    return skipped
