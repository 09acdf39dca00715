"""Command line interface.

Subcommands: run (full pipeline to an artifact directory), compare (three-way
method comparison), make-scene (generate reflector layouts), and
check-constraints (print derived limits and sampling bounds).

Exit codes: 0 success, 2 configuration or input-file error, 3 odometry
failure, 4 physical constraint violation.
"""

from __future__ import annotations

import argparse
import math
import sys

from .config import (
    RadarConfig,
    coherent_interval_frames,
    derive_limits,
    load_radar_config,
    max_platform_speed,
)
from .detect import CfarParams
from .errors import ConfigError, ConstraintViolationError, OdometryError, RoisarError
from .imaging import SarParams
from .scene import (
    PointTarget,
    Scene,
    load_scene,
    load_trajectory,
    rectangle_outline,
    save_scene,
)
from .scenario import ScenarioSpec, compare_methods, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ODOMETRY = 3
EXIT_CONSTRAINT = 4


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="radar config file (key=value); defaults used if omitted")
    p.add_argument("--scene", required=True, help="scene file: x_m y_m [re im] per line")
    p.add_argument("--trajectory", required=True, help="trajectory file: vx vy per frame")
    p.add_argument("--frames", type=int, help="frames to run (default: whole trajectory)")
    p.add_argument("--noise-power", type=float, default=0.016)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--odometry", choices=["truth", "estimated"], default="truth")
    p.add_argument("--allow-odometry-fallback", action="store_true",
                   help="fall back to the true trajectory when estimation fails")
    p.add_argument("--deterministic", action="store_true",
                   help="omit wall-clock timings so outputs are byte-reproducible")
    p.add_argument("--k-chirps", type=int, default=20)
    p.add_argument("--pixel-x", type=float, default=0.01, help="pixel pitch along x, m")
    p.add_argument("--pixel-y", type=float, default=0.1, help="pixel pitch along y, m")
    p.add_argument("--depth", type=float, default=0.9, help="region depth per detection, m")
    p.add_argument("--scope-deg", type=float, default=5.0, help="region angular scope, deg")
    p.add_argument("--m-range", type=int, default=64)
    p.add_argument("--m-theta-sar", type=int, default=16)
    p.add_argument("--m-velocity", type=int, default=256)
    p.add_argument("--m-theta-detect", type=int, default=128)
    p.add_argument("--window", choices=["rect", "hann"], default="rect")
    p.add_argument("--cfar-pfa", type=float, default=1e-4)
    p.add_argument("--cfar-train", type=int, default=8)
    p.add_argument("--cfar-guard", type=int, default=2)
    p.add_argument("--ransac-iterations", type=int, default=100)
    p.add_argument("--ransac-threshold", type=float,
                   help="inlier threshold, m/s (default: 3x velocity resolution)")


def _build_spec(args) -> ScenarioSpec:
    cfg = load_radar_config(args.config) if args.config else RadarConfig()
    scene = load_scene(args.scene)
    trajectory = load_trajectory(args.trajectory)
    frames = args.frames if args.frames is not None else trajectory.frame_count
    sar = SarParams(
        k_chirps=args.k_chirps,
        pitch_x_m=args.pixel_x,
        pitch_y_m=args.pixel_y,
        depth_m=args.depth,
        scope_rad=math.radians(args.scope_deg),
        m_range=args.m_range,
        m_theta=args.m_theta_sar,
        window=args.window,
    )
    cfar = CfarParams(args.cfar_pfa, args.cfar_train, args.cfar_guard)
    return ScenarioSpec(
        cfg=cfg,
        scene=scene,
        trajectory=trajectory,
        frames=frames,
        noise_power=args.noise_power,
        seed=args.seed,
        odometry_mode=args.odometry,
        sar=sar,
        cfar=cfar,
        m_velocity_detect=args.m_velocity,
        m_theta_detect=args.m_theta_detect,
        ransac_iterations=args.ransac_iterations,
        ransac_threshold_mps=args.ransac_threshold,
        allow_odometry_fallback=args.allow_odometry_fallback,
        deterministic=args.deterministic,
        dump_cubes=getattr(args, "dump_cubes", False),
    )


def _cmd_run(args) -> int:
    spec = _build_spec(args)
    result = run_scenario(spec, out_dir=args.out)
    n_det = sum(len(v) for v in result.detections.values())
    print(f"frames={spec.frames} detections={n_det} "
          f"active_pixels={result.image.active_count} flops={result.total_flops:.4g}")
    print(f"artifacts written to {args.out}")
    if result.report.get("coherent_interval_exceeded"):
        print(f"warning: {spec.frames} frames exceed the coherent interval "
              f"{result.report['coherent_interval_frames']:.1f} estimated from odometry noise",
              file=sys.stderr)
    return EXIT_OK


def _cmd_compare(args) -> int:
    spec = _build_spec(args)
    bounds = tuple(args.plane)
    rows, _ = compare_methods(spec, bounds, out_dir=args.out)
    print(f"{'method':<26}{'flops':>16}{'runtime_s':>12}  peaks")
    for row in rows:
        t = "-" if math.isnan(row.runtime_s) else f"{row.runtime_s:.3f}"
        peaks = " ".join(f"({x:.3f},{y:.3f})" for x, y in row.peaks)
        print(f"{row.method:<26}{row.flops:>16.4g}{t:>12}  {peaks}")
    return EXIT_OK


def _cmd_make_scene(args) -> int:
    targets = []
    for cx, cy, w, h in args.rect or []:
        targets.extend(rectangle_outline(cx, cy, w, h, args.spacing))
    for x, y in args.point or []:
        targets.append(PointTarget(x, y))
    if not targets:
        raise ConfigError("nothing to write: give at least one --rect or --point")
    save_scene(Scene(targets), args.out)
    print(f"wrote {len(targets)} targets to {args.out}")
    return EXIT_OK


def _cmd_check_constraints(args) -> int:
    cfg = load_radar_config(args.config) if args.config else RadarConfig()
    limits = derive_limits(cfg)
    print(f"range resolution      {limits.range_resolution_m:.6g} m")
    print(f"velocity resolution   {limits.velocity_resolution_mps:.6g} m/s")
    print(f"angle resolution      {math.degrees(limits.angle_resolution_rad):.6g} deg")
    print(f"max range             {limits.max_range_m:.6g} m")
    print(f"max velocity          {limits.max_velocity_mps:.6g} m/s")
    print(f"max angle             {math.degrees(limits.max_angle_rad):.6g} deg")
    scoped = max_platform_speed(cfg, args.k_chirps, math.radians(args.scope_deg))
    full = max_platform_speed(cfg, args.k_chirps, math.pi)
    print(f"admissible speed      {scoped:.6g} m/s at {args.scope_deg:g} deg scope")
    print(f"admissible speed      {full:.6g} m/s at 180 deg scope")
    for sigma in args.sigma or [0.003, 0.005, 0.007, 0.01]:
        bound = coherent_interval_frames(cfg, sigma)
        print(f"coherent interval     {bound.frames_int} frames "
              f"({bound.frames:.4g}) at sigma {sigma:g} m/s")
    if args.speed is not None and args.speed > scoped:
        print(f"speed {args.speed:g} m/s violates the admissible {scoped:.6g} m/s",
              file=sys.stderr)
        return EXIT_CONSTRAINT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roisar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full pipeline and write artifacts")
    _add_scenario_args(p_run)
    p_run.add_argument("--out", required=True, help="artifact output directory")
    p_run.add_argument("--dump-cubes", action="store_true",
                       help="also dump per-frame IQ sample cubes")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="compare imaging methods on one scenario")
    _add_scenario_args(p_cmp)
    p_cmp.add_argument("--plane", type=float, nargs=4, required=True,
                       metavar=("X0", "X1", "Y0", "Y1"),
                       help="full image plane bounds for the baseline, m")
    p_cmp.add_argument("--out", help="optional output directory for the comparison table")
    p_cmp.set_defaults(func=_cmd_compare)

    p_mk = sub.add_parser("make-scene", help="write a scene file of point reflectors")
    p_mk.add_argument("--rect", type=float, nargs=4, action="append",
                      metavar=("CX", "CY", "W", "H"),
                      help="rectangle outline of points (repeatable)")
    p_mk.add_argument("--point", type=float, nargs=2, action="append",
                      metavar=("X", "Y"), help="single point (repeatable)")
    p_mk.add_argument("--spacing", type=float, default=0.2, help="outline point spacing, m")
    p_mk.add_argument("--out", required=True)
    p_mk.set_defaults(func=_cmd_make_scene)

    p_chk = sub.add_parser("check-constraints", help="print derived limits and bounds")
    p_chk.add_argument("--config")
    p_chk.add_argument("--k-chirps", type=int, default=20)
    p_chk.add_argument("--scope-deg", type=float, default=5.0)
    p_chk.add_argument("--sigma", type=float, action="append",
                       help="odometry noise level for the coherent-interval bound "
                            "(repeatable; default 0.003 0.005 0.007 0.01)")
    p_chk.add_argument("--speed", type=float,
                       help="platform speed to validate (exit 4 when too fast)")
    p_chk.set_defaults(func=_cmd_check_constraints)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConstraintViolationError as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except OdometryError as exc:
        print(f"odometry failure: {exc}", file=sys.stderr)
        return EXIT_ODOMETRY
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoisarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
