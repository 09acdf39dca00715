"""Side-looking FMCW MIMO radar simulation, detection-gated SAR imaging,
and radar odometry."""

from .config import (
    CoherentIntervalBound,
    DerivedLimits,
    RadarConfig,
    coherent_interval_frames,
    derive_limits,
    expected_position_drift,
    load_radar_config,
    max_platform_speed,
    short_range_77ghz_config,
    write_radar_config,
)
from .detect import CfarParams, Detection, cfar_2d, detect_frame, estimate_angles, integrate_noncoherent, peak_group
from .errors import (
    ConfigError,
    ConstraintViolationError,
    DegenerateGeometryError,
    EstimationFailedError,
    OdometryError,
    RoisarError,
)
from .flops import FlopTally
from .imaging import (
    Roi,
    SarImage,
    SarParams,
    accumulate_snapshot,
    baseline_backprojection,
    build_roi,
    image_region,
    lookup_measurement,
    matched_filter,
    pixel_geometry,
    range_angle_image,
)
from .odometry import (
    EgoEstimate,
    TrajectoryEstimate,
    integrate_trajectory,
    ransac_stationary,
    solve_velocity,
)
from .scene import PointTarget, Scene, Trajectory, load_scene, load_trajectory, rectangle_outline
from .scenario import ScenarioSpec, compare_methods, run_scenario
from .spectral import RvaCube, angle_fft, range_fft, snapshot_rva, tdm_compensate, velocity_fft
from .synth import IQCube, dump_iq_cube, load_iq_cube, synthesize_frame

__version__ = "0.1.0"
