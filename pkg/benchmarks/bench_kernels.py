"""Throughput comparison of the two image-accumulation kernel backends.

Runs the snapshot (range-velocity-angle lookup) and per-chirp (range-profile
lookup) kernels on an identical synthetic workload with both the compiled
extension and the numpy fallback, and reports pixel updates per second.

Usage:
    python benchmarks/bench_kernels.py [--pixels 40000] [--snapshots 64] [--repeats 5]
"""

import argparse
import time

import numpy as np

from roisar.config import RadarConfig
from roisar.imaging import angle_scale, phase_scale, range_scale
from roisar.kernels import reference

try:
    from roisar.kernels import _accel
except ImportError:
    _accel = None


def make_case(pixels: int, seed: int = 0):
    """A fully active image grid 1-26 m downrange plus random spectra."""
    cfg = RadarConfig()
    rng = np.random.default_rng(seed)
    ny = 250
    nx = max(1, pixels // ny)
    ix, iy = np.divmod(np.arange(nx * ny, dtype=np.int64), ny)
    case = {
        "shape": (nx, ny),
        "ix": np.ascontiguousarray(ix),
        "iy": np.ascontiguousarray(iy),
        "kx0": -(nx // 2),
        "ky0": 10,  # 1 m standoff at 0.1 m pitch
        "dwx": 0.01,
        "dwy": 0.1,
        "rva": (rng.normal(size=(64, 20, 16)) + 1j * rng.normal(size=(64, 20, 16))),
        "profile": (rng.normal(size=64) + 1j * rng.normal(size=64)),
        "rscale": range_scale(cfg, 64),
        "ascale": angle_scale(cfg, 16),
        "pscale": phase_scale(cfg),
    }
    return case


def run_rva(backend, case, positions):
    image = np.zeros(case["shape"], dtype=np.complex128)
    for xs in positions:
        backend.accumulate_rva(
            image, case["ix"], case["iy"], case["kx0"], case["ky0"],
            case["dwx"], case["dwy"], xs, 0.0, case["rva"],
            case["rscale"], case["ascale"], case["pscale"],
        )
    return image


def run_profile(backend, case, positions):
    image = np.zeros(case["shape"], dtype=np.complex128)
    for xs in positions:
        backend.accumulate_profile(
            image, case["ix"], case["iy"], case["kx0"], case["ky0"],
            case["dwx"], case["dwy"], xs, 0.0, case["profile"],
            case["rscale"], case["pscale"],
        )
    return image


def best_time(func, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pixels", type=int, default=40000, help="active pixels in the image")
    parser.add_argument("--snapshots", type=int, default=64, help="platform positions per run")
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats per timing")
    args = parser.parse_args(argv)

    case = make_case(args.pixels)
    positions = np.linspace(-0.3, 0.3, args.snapshots)
    updates = case["ix"].size * args.snapshots

    backends = [("python", reference)]
    if _accel is not None:
        backends.insert(0, ("compiled", _accel))
    else:
        print("compiled extension not importable; timing the fallback only")

    # Agreement guard: identical output before any timing is reported.
    if len(backends) == 2:
        a = run_rva(backends[0][1], case, positions)
        b = run_rva(backends[1][1], case, positions)
        assert np.allclose(a, b, atol=1e-9), "backends disagree on the benchmark case"

    print(f"{case['ix'].size} pixels x {args.snapshots} snapshots "
          f"= {updates / 1e6:.2f} M pixel updates per run")
    print(f"{'kernel':<18} {'backend':<9} {'best s':>9} {'Mupd/s':>9} {'speedup':>8}")
    for kernel, runner in (("snapshot_rva", run_rva), ("range_profile", run_profile)):
        base = None
        rows = []
        for name, mod in backends:
            t = best_time(lambda m=mod: runner(m, case, positions), args.repeats)
            rows.append((name, t))
        base = rows[-1][1]  # python fallback is listed last
        for name, t in rows:
            print(f"{kernel:<18} {name:<9} {t:>9.4f} {updates / t / 1e6:>9.1f} "
                  f"{base / t:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
