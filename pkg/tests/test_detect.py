"""CA-CFAR detection: threshold law, edge handling, grouping, angles."""

import math

import numpy as np
import pytest

from roisar import (
    CfarParams,
    ConfigError,
    PointTarget,
    Scene,
    cfar_2d,
    detect_frame,
    integrate_noncoherent,
    peak_group,
    synthesize_frame,
)
from roisar.detect import (
    bin_to_range,
    bin_to_sin_theta,
    bin_to_velocity,
    threshold_factor,
    write_detections_csv,
)
from roisar.scene import constant_trajectory


def test_threshold_factor_frozen():
    # alpha = N (Pfa^(-1/N) - 1); the default window has N = 2*2*8 = 32.
    assert threshold_factor(1e-4, 32) == pytest.approx(10.672685829226367, rel=1e-12)
    assert threshold_factor(0.5, 1) == pytest.approx(1.0, rel=1e-12)
    # Decreasing in N, bounded below by ln(1/Pfa).
    assert threshold_factor(1e-4, 16) > threshold_factor(1e-4, 32) > math.log(1e4)
    with pytest.raises(ConfigError):
        threshold_factor(1e-4, 0)


def test_cfar_params_validation():
    with pytest.raises(ConfigError):
        CfarParams(false_alarm_rate=0.0)
    with pytest.raises(ConfigError):
        CfarParams(false_alarm_rate=1.0)
    with pytest.raises(ConfigError):
        CfarParams(train_cells=0)
    with pytest.raises(ConfigError):
        CfarParams(guard_cells=-1)


def test_integrate_noncoherent():
    rng = np.random.default_rng(0)
    rv = rng.standard_normal((4, 5, 3)) + 1j * rng.standard_normal((4, 5, 3))
    np.testing.assert_allclose(integrate_noncoherent(rv), np.abs(rv).sum(axis=2))
    with pytest.raises(ConfigError):
        integrate_noncoherent(rv[:, :, 0])


def test_cfar_empirical_false_alarm_rate():
    # Unit-mean exponential noise (post-square-law) on a large map: the
    # realized Pfa must sit in a generous band around the design value.
    params = CfarParams(false_alarm_rate=1e-4)
    rng = np.random.default_rng(11)
    power = rng.exponential(1.0, size=(1024, 1024))
    rate = len(cfar_2d(power, params)) / power.size
    assert 0.2e-4 < rate < 5e-4


def test_cfar_interior_threshold_boundary():
    # All-ones training: the local mean is exactly 1, so the spike detects
    # iff it exceeds alpha(N=32).
    params = CfarParams(false_alarm_rate=1e-4)
    alpha = threshold_factor(1e-4, 32)
    power = np.ones((64, 64))
    power[30, 30] = alpha * 1.001
    assert (30, 30) in cfar_2d(power, params)
    power[30, 30] = alpha * 0.999
    assert (30, 30) not in cfar_2d(power, params)


def cfar_reference(power, params):
    """Direct per-cell reimplementation of the truncated cross window."""
    t, g = params.train_cells, params.guard_cells
    nr, nv = power.shape
    hits = []
    for i in range(nr):
        for j in range(nv):
            acc, count = 0.0, 0
            for di in range(-(t + g), t + g + 1):
                if abs(di) <= g or not 0 <= i + di < nr:
                    continue
                acc += power[i + di, j]
                count += 1
            for dj in range(-(t + g), t + g + 1):
                if abs(dj) <= g or not 0 <= j + dj < nv:
                    continue
                acc += power[i, j + dj]
                count += 1
            if power[i, j] > threshold_factor(params.false_alarm_rate, count) * acc / count:
                hits.append((i, j))
    return hits


def test_cfar_matches_bruteforce_including_edges():
    params = CfarParams(false_alarm_rate=1e-2, train_cells=4, guard_cells=1)
    rng = np.random.default_rng(12)
    power = rng.exponential(1.0, size=(22, 30))
    power[3, 4] = 200.0  # near-edge target
    power[11, 15] = 150.0
    assert cfar_2d(power, params) == cfar_reference(power, params)


def test_cfar_validation():
    params = CfarParams(train_cells=8, guard_cells=2)
    with pytest.raises(ConfigError):
        cfar_2d(np.ones((20, 64)), params)  # 20 <= 2*(8+2)
    with pytest.raises(ConfigError):
        cfar_2d(np.ones(64), params)


def test_peak_group_matches_bruteforce():
    rng = np.random.default_rng(13)
    power = rng.exponential(1.0, size=(40, 40))
    cells = [(int(i), int(j)) for i in range(40) for j in range(40)]
    survivors = set(peak_group(cells, power))
    for i in range(40):
        for j in range(40):
            window = power[max(0, i - 1) : i + 2, max(0, j - 1) : j + 2]
            is_max = power[i, j] >= window.max()
            assert ((i, j) in survivors) == is_max  # continuous noise: no ties


def test_peak_group_plateau_single_survivor():
    power = np.zeros((10, 10))
    plateau = [(4, 4), (4, 5), (5, 4), (5, 5)]
    for cell in plateau:
        power[cell] = 7.0
    assert peak_group(plateau, power) == [(4, 4)]  # lexicographically smallest
    # A strictly higher neighbor kills the whole plateau.
    power[3, 4] = 8.0
    assert peak_group(plateau, power) == []


def test_bin_maps_frozen(cfg):
    assert bin_to_range(11, cfg, 64) == pytest.approx(4.907317020833333, rel=1e-12)
    assert bin_to_range(0, cfg, 64) == 0.0
    assert bin_to_velocity(128, cfg, 256) == 0.0
    assert bin_to_velocity(140, cfg, 256) == pytest.approx(
        12 * cfg.wavelength_m / (2 * cfg.chirp_interval_s * 256), rel=1e-12
    )
    assert bin_to_sin_theta(64, cfg, 128) == 0.0
    assert bin_to_sin_theta(96, cfg, 128) == pytest.approx(0.5, rel=1e-12)
    assert bin_to_sin_theta(0, cfg, 128) == pytest.approx(-1.0, rel=1e-12)


def test_detect_frame_three_targets(cfg):
    # Well-separated reflectors: exactly one detection each, with range,
    # velocity, and angle recovered to within one bin quantum.
    targets = [
        PointTarget(0.0, 4.3),
        PointTarget(-4.5, 7.8),  # theta = -30 deg
        PointTarget(7.0, 12.1),
    ]
    cube = synthesize_frame(
        Scene(targets), constant_trajectory(0.0, 0.0, 1), cfg, 0, noise_power=0.016, seed=4
    )
    detections = detect_frame(cube, cfg)
    assert len(detections) == 3
    got = sorted(detections, key=lambda d: d.range_m)
    r_quantum = cfg.sampling_rate_sps * 299792458.0 / (2 * cfg.sweep_slope_hz_per_s * 64)
    for d, t in zip(got, sorted(targets, key=lambda t: math.hypot(t.x_m, t.y_m))):
        r_true = math.hypot(t.x_m, t.y_m)
        sin_true = t.x_m / r_true
        assert abs(d.range_m - r_true) <= r_quantum
        assert abs(d.velocity_mps) <= 0.05  # stationary scene, still platform
        assert abs(math.sin(d.azimuth_rad) - sin_true) <= 1.5 * 2.0 / 128
        # Bin/value consistency.
        assert d.range_m == pytest.approx(bin_to_range(d.range_bin, cfg, 64))
        assert d.velocity_mps == pytest.approx(bin_to_velocity(d.velocity_bin, cfg, 256))
        expected_sin = min(1.0, max(-1.0, bin_to_sin_theta(d.angle_bin, cfg, 128)))
        assert math.sin(d.azimuth_rad) == pytest.approx(expected_sin, abs=1e-12)
    # Lexicographic output order by (range bin, velocity bin).
    keys = [(d.range_bin, d.velocity_bin) for d in detections]
    assert keys == sorted(keys)


def test_detect_frame_radial_velocity_sign(cfg):
    # Platform at v=(1,0), reflector 30 deg starboard: closing at
    # v_r = -(sin(30) * 1.0) = -0.5 m/s.
    target = PointTarget(5.0 * 0.5, 5.0 * math.sqrt(3) / 2)
    cube = synthesize_frame(
        Scene([target]), constant_trajectory(1.0, 0.0, 1), cfg, 0, noise_power=0.001, seed=5
    )
    detections = detect_frame(cube, cfg)
    assert len(detections) == 1
    v_quantum = cfg.wavelength_m / (2 * cfg.chirp_interval_s * 256)
    assert detections[0].velocity_mps == pytest.approx(-0.5, abs=v_quantum)


def test_write_detections_csv(cfg, tmp_path):
    cube = synthesize_frame(
        Scene([PointTarget(0.0, 5.0)]), constant_trajectory(0.0, 0.0, 2), cfg, 0
    )
    by_frame = {0: detect_frame(cube, cfg), 1: []}
    path = tmp_path / "detections.csv"
    write_detections_csv(by_frame, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "frame,r_m,v_r_mps,theta_rad,amplitude,m_r,m_v,m_theta"
    assert len(lines) == 1 + len(by_frame[0])
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == pytest.approx(by_frame[0][0].range_m)
    assert int(first[5]) == by_frame[0][0].range_bin
