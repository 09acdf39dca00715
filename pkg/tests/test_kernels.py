"""Compiled and pure-python accumulation kernels must be interchangeable."""

import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

from roisar import kernels
from roisar.kernels import reference

HAVE_ACCEL = importlib.util.find_spec("roisar.kernels._accel") is not None
accel = pytest.importorskip("roisar.kernels._accel") if HAVE_ACCEL else None


def rva_case(seed, mr=8, mv=10, mt=16):
    """Random snapshot + pixel grid; the far rows always clip the range map."""
    rng = np.random.default_rng(seed)
    nx, ny = 25, 24  # y reaches 4.3 m > mr/range_scale = 3.6 m
    ix, iy = np.meshgrid(np.arange(nx, dtype=np.int64), np.arange(ny, dtype=np.int64),
                         indexing="ij")
    ix, iy = np.ascontiguousarray(ix.ravel()), np.ascontiguousarray(iy.ravel())
    image = rng.standard_normal((nx, ny)) + 1j * rng.standard_normal((nx, ny))
    rva = rng.standard_normal((mr, mv, mt)) + 1j * rng.standard_normal((mr, mv, mt))
    args = dict(
        kx0=-12, ky0=20, dwx=0.01, dwy=0.1,
        xs=float(rng.uniform(-0.2, 0.2)), ys=float(rng.uniform(-0.5, 0.5)),
        range_scale=2.24, angle_scale=8.0, phase_scale=988.0,
    )
    return image, ix, iy, rva, args


def run_rva(backend, image, ix, iy, rva, args):
    out = image.copy()
    skipped = backend.accumulate_rva(
        out, ix, iy, args["kx0"], args["ky0"], args["dwx"], args["dwy"],
        args["xs"], args["ys"], rva, args["range_scale"], args["angle_scale"],
        args["phase_scale"],
    )
    return out, skipped


def run_profile(backend, image, ix, iy, profile, args):
    out = image.copy()
    skipped = backend.accumulate_profile(
        out, ix, iy, args["kx0"], args["ky0"], args["dwx"], args["dwy"],
        args["xs"], args["ys"], profile, args["range_scale"], args["phase_scale"],
    )
    return out, skipped


@pytest.mark.skipif(not HAVE_ACCEL, reason="compiled backend not built")
@pytest.mark.parametrize("seed", range(5))
def test_rva_kernel_backends_agree(seed):
    image, ix, iy, rva, args = rva_case(seed)
    ref_img, ref_skip = run_rva(reference, image, ix, iy, rva, args)
    acc_img, acc_skip = run_rva(accel, image, ix, iy, rva, args)
    assert acc_skip == ref_skip
    np.testing.assert_allclose(acc_img, ref_img, rtol=0, atol=1e-12)
    assert ref_skip > 0  # the case must actually exercise clipping


@pytest.mark.skipif(not HAVE_ACCEL, reason="compiled backend not built")
@pytest.mark.parametrize("seed", range(5))
def test_profile_kernel_backends_agree(seed):
    image, ix, iy, _, args = rva_case(seed)
    rng = np.random.default_rng(100 + seed)
    profile = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    ref_img, ref_skip = run_profile(reference, image, ix, iy, profile, args)
    acc_img, acc_skip = run_profile(accel, image, ix, iy, profile, args)
    assert acc_skip == ref_skip
    np.testing.assert_allclose(acc_img, ref_img, rtol=0, atol=1e-12)


@pytest.mark.skipif(not HAVE_ACCEL, reason="compiled backend not built")
def test_velocity_argmax_tie_first_wins():
    # Two velocity bins with exactly equal power: both backends must pick
    # the lower bin, matching numpy argmax semantics.
    image = np.zeros((1, 1), dtype=np.complex128)
    ix = np.zeros(1, dtype=np.int64)
    iy = np.zeros(1, dtype=np.int64)
    rva = np.zeros((8, 10, 16), dtype=np.complex128)
    rva[4, 2, 8] = 3.0 + 4.0j  # |.|^2 = 25
    rva[4, 7, 8] = 4.0 - 3.0j  # |.|^2 = 25, must lose the tie
    args = dict(kx0=0, ky0=20, dwx=0.01, dwy=0.1, xs=0.0, ys=0.0,
                range_scale=2.24, angle_scale=8.0, phase_scale=0.0)
    ref_img, _ = run_rva(reference, image, ix, iy, rva, args)
    acc_img, _ = run_rva(accel, image, ix, iy, rva, args)
    assert ref_img[0, 0] == 3.0 + 4.0j  # phase_scale 0: raw value lands
    assert acc_img[0, 0] == 3.0 + 4.0j


def test_zero_range_pixel_skipped():
    # A pixel exactly under the platform is singular and must be skipped.
    image = np.zeros((1, 1), dtype=np.complex128)
    ix = np.zeros(1, dtype=np.int64)
    iy = np.zeros(1, dtype=np.int64)
    rva = np.ones((8, 4, 16), dtype=np.complex128)
    backends = [reference] + ([accel] if HAVE_ACCEL else [])
    for backend in backends:
        out = image.copy()
        skipped = backend.accumulate_rva(
            out, ix, iy, 0, 0, 0.01, 0.1, 0.0, 0.0, rva, 2.24, 8.0, 988.0
        )
        assert skipped == 1
        assert out[0, 0] == 0


def test_active_backend_matches_reference():
    # Whatever backend the package selected, it must reproduce the reference.
    image, ix, iy, rva, args = rva_case(99)
    ref_img, ref_skip = run_rva(reference, image, ix, iy, rva, args)
    act_img, act_skip = run_rva(kernels, image, ix, iy, rva, args)
    assert act_skip == ref_skip
    np.testing.assert_allclose(act_img, ref_img, rtol=0, atol=1e-12)
    assert kernels.backend_name() in ("python", "compiled")


def test_env_var_forces_python_backend():
    env = dict(os.environ, ROISAR_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import roisar.kernels as k; print(k.backend_name())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.skipif(not HAVE_ACCEL, reason="compiled backend not built")
def test_default_backend_is_compiled_when_built():
    env = {k: v for k, v in os.environ.items() if k != "ROISAR_PURE_PYTHON"}
    out = subprocess.run(
        [sys.executable, "-c", "import roisar.kernels as k; print(k.backend_name())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "compiled"
