"""IF sample synthesis: phase model, linearity, noise, and the dump format."""

import dataclasses
import math

import numpy as np
import pytest
from scipy.constants import c as C0

from roisar import (
    ConfigError,
    IQCube,
    PointTarget,
    RadarConfig,
    Scene,
    Trajectory,
    dump_iq_cube,
    load_iq_cube,
    range_fft,
    synthesize_frame,
    velocity_fft,
)
from roisar.scene import constant_trajectory


def small_cfg() -> RadarConfig:
    return RadarConfig(samples_per_chirp=16, chirps_per_frame=8, tx_count=2, rx_count=2)


def still() -> Trajectory:
    return constant_trajectory(0.0, 0.0, 4)


def test_single_target_amplitude(cfg):
    # One unit reflector: every sample has modulus A_tx*A_rx/2 = 0.5.
    cube = synthesize_frame(Scene([PointTarget(0.0, 5.0)]), still(), cfg, 0)
    assert cube.shape == (64, 255, 8)
    np.testing.assert_allclose(np.abs(cube.samples), 0.5, rtol=1e-12)


def test_first_sample_phase_closed_form(cfg):
    # Sample (0,0,0) of a stationary broadside target carries only the
    # carrier and residual-video terms: 0.5 exp(j 2 pi (f_c tau - S tau^2/2)).
    r = 5.0
    tau = 2.0 * r / C0
    expected = 0.5 * np.exp(
        2j
        * np.pi
        * (cfg.carrier_frequency_hz * tau - 0.5 * cfg.sweep_slope_hz_per_s * tau * tau)
    )
    cube = synthesize_frame(Scene([PointTarget(0.0, r)]), still(), cfg, 0)
    assert cube.samples[0, 0, 0] == pytest.approx(expected, rel=1e-9)


def test_beat_frequency_bin(cfg):
    # r=5 m -> f_b = 2 S r / c = 700.5 kHz -> bin 11 of 64 at 4 Msps.
    cube = synthesize_frame(Scene([PointTarget(0.0, 5.0)]), still(), cfg, 0)
    spectrum = np.abs(range_fft(cube.samples, 64))
    assert int(np.argmax(spectrum[:, 0, 0])) == 11


def test_bin_centred_target_peak_gain(cfg):
    # A target at exactly bin 10 gives a rectangular-window peak of N_s * 0.5.
    r = 10.0 * C0 * cfg.sampling_rate_sps / (2.0 * cfg.sweep_slope_hz_per_s * 64)
    cube = synthesize_frame(Scene([PointTarget(0.0, r)]), still(), cfg, 0)
    spectrum = np.abs(range_fft(cube.samples, 64))
    assert spectrum[10, 0, 0] == pytest.approx(64 * 0.5, rel=1e-9)


def test_reflectivity_linearity(cfg):
    scene_a = Scene([PointTarget(-1.0, 6.0)])
    scene_b = Scene([PointTarget(2.0, 4.0, 0.5 + 0.25j)])
    both = Scene(scene_a.targets + scene_b.targets)
    traj = constant_trajectory(1.0, 0.5, 2)
    a = synthesize_frame(scene_a, traj, cfg, 1).samples
    b = synthesize_frame(scene_b, traj, cfg, 1).samples
    ab = synthesize_frame(both, traj, cfg, 1).samples
    np.testing.assert_allclose(ab, a + b, rtol=0, atol=1e-12)

    scaled = Scene([PointTarget(-1.0, 6.0, 2.0 - 1.0j)])
    np.testing.assert_allclose(
        synthesize_frame(scaled, traj, cfg, 1).samples, (2.0 - 1.0j) * a, rtol=1e-12
    )


def test_channel_phase_ramp(cfg):
    # Stationary platform: channel q leads channel 0 by 2 pi q h sin(theta)/lambda.
    x, y = 2.0, 4.0
    sin_theta = x / math.hypot(x, y)
    cube = synthesize_frame(Scene([PointTarget(x, y)]), still(), cfg, 0).samples
    q = np.arange(cfg.virtual_channel_count)
    expected = np.exp(2j * np.pi * q * cfg.channel_spacing_m * sin_theta / cfg.wavelength_m)
    np.testing.assert_allclose(cube[5, 7, :] / cube[5, 7, 0], expected, rtol=1e-9)

    # The mirrored target produces the conjugate ramp.
    mirror = synthesize_frame(Scene([PointTarget(-x, y)]), still(), cfg, 0).samples
    np.testing.assert_allclose(
        mirror[5, 7, :] / mirror[5, 7, 0], np.conj(expected), rtol=1e-9
    )


def test_range_rate_sign(cfg):
    # Opening geometry (platform backing away) must land above the
    # zero-Doppler bin M_v/2; closing geometry below it.
    scene = Scene([PointTarget(0.0, 5.0)])
    away = synthesize_frame(scene, constant_trajectory(0.0, -1.0, 1), cfg, 0)
    toward = synthesize_frame(scene, constant_trajectory(0.0, 1.0, 1), cfg, 0)
    for cube, expected_bin in ((away, 140), (toward, 116)):
        rv = velocity_fft(range_fft(cube.samples, 64), 256)
        power = np.abs(rv[11, :, 0])
        assert int(np.argmax(power)) == expected_bin


def test_noise_determinism_and_statistics(cfg):
    scene = Scene([PointTarget(0.0, 5.0)])
    traj = still()
    a = synthesize_frame(scene, traj, cfg, 0, noise_power=0.016, seed=9)
    b = synthesize_frame(scene, traj, cfg, 0, noise_power=0.016, seed=9)
    assert np.array_equal(a.samples, b.samples)  # bit identical
    c = synthesize_frame(scene, traj, cfg, 0, noise_power=0.016, seed=10)
    assert not np.array_equal(a.samples, c.samples)
    # Noise is per-(seed, frame): frame 1 draws an independent stream.
    d = synthesize_frame(scene, traj, cfg, 1, noise_power=0.016, seed=9)
    assert not np.array_equal(a.samples, d.samples)

    clean = synthesize_frame(scene, traj, cfg, 0).samples
    noise = a.samples - clean
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.016, rel=0.02)
    assert abs(np.mean(noise)) < 1e-3  # zero-mean circular


def test_empty_scene(cfg):
    noise_only = synthesize_frame(Scene([]), still(), cfg, 0, noise_power=0.01, seed=0)
    assert np.all(np.abs(noise_only.samples) > 0)
    with pytest.raises(ConfigError):
        synthesize_frame(Scene([]), still(), cfg, 0, noise_power=0.0)
    with pytest.raises(ConfigError):
        synthesize_frame(Scene([PointTarget(0, 5)]), still(), cfg, 0, noise_power=-0.1)


def test_degenerate_geometry(cfg):
    # Platform starts at the origin; a target there is singular.
    with pytest.raises(ConfigError):
        synthesize_frame(Scene([PointTarget(0.0, 0.0)]), still(), cfg, 0)
    # A target the platform drives through mid-frame is singular too.
    traj = constant_trajectory(2.0, 0.0, 1)
    on_track = PointTarget(2.0 * 10 * cfg.chirp_interval_s, 0.0)
    with pytest.raises(ConfigError):
        synthesize_frame(Scene([on_track]), traj, cfg, 0)


def test_initial_phase_cancels(cfg):
    # De-chirp mixing removes the transmit start phase entirely.
    shifted = dataclasses.replace(cfg, initial_phase_rad=1.2345)
    scene = Scene([PointTarget(1.0, 5.0)])
    a = synthesize_frame(scene, still(), cfg, 0).samples
    b = synthesize_frame(scene, still(), shifted, 0).samples
    np.testing.assert_array_equal(a, b)


def test_iq_dump_round_trip(tmp_path):
    cfg = small_cfg()
    cube = synthesize_frame(
        Scene([PointTarget(0.5, 4.0)]), still(), cfg, 3, noise_power=0.01, seed=2
    )
    path = tmp_path / "frame.iq"
    dump_iq_cube(cube, path)
    with open(path, "rb") as fh:
        assert fh.readline() == b"16 8 4 3\n"
        assert len(fh.read()) == 16 * 8 * 4 * 16  # complex128 payload
    back = load_iq_cube(path)
    assert back.frame_index == 3
    assert np.array_equal(back.samples, cube.samples)


def test_iq_dump_sample_order(tmp_path):
    # Sample index varies fastest, then chirp, then channel.
    cfg = small_cfg()
    cube = synthesize_frame(Scene([PointTarget(0.5, 4.0)]), still(), cfg, 0)
    path = tmp_path / "frame.iq"
    dump_iq_cube(cube, path)
    with open(path, "rb") as fh:
        fh.readline()
        flat = np.frombuffer(fh.read(), dtype="<c16")
    np.testing.assert_array_equal(flat[:16], cube.samples[:, 0, 0])
    np.testing.assert_array_equal(flat[16:32], cube.samples[:, 1, 0])
    np.testing.assert_array_equal(flat[16 * 8 : 16 * 8 + 16], cube.samples[:, 0, 1])


def test_iq_load_errors(tmp_path):
    path = tmp_path / "bad.iq"
    path.write_bytes(b"16 8 4\n" + b"\x00" * 64)
    with pytest.raises(ConfigError):
        load_iq_cube(path)
    path.write_bytes(b"16 8 4 0\n" + b"\x00" * 64)  # truncated payload
    with pytest.raises(ConfigError):
        load_iq_cube(path)


def test_iq_cube_shape_validation():
    with pytest.raises(ConfigError):
        IQCube(samples=np.zeros((4, 4)), frame_index=0)
