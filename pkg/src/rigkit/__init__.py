"""Toolkit for multimodal sensor rigs: SE(3) transforms and frame trees,
clock-domain synchronization, IMU noise characterization, camera
reprojection and point-cloud colorization, trajectory evaluation, and a
portable dataset container with integrity validation."""

__version__ = "0.1.0"

from .se3 import (  # noqa: F401
    EulerAnglesDeg,
    EulerConvention,
    Transform,
    UnitQuaternion,
    compose,
    euler_from_quat,
    invert,
    quat_from_euler,
    rotation_angle_between,
    transform_point,
    translation_distance,
)
from .tfgraph import (  # noqa: F401
    CalibEdge,
    ExtrinsicDiff,
    FrameGraph,
    add_edge,
    diff_graphs,
    export_calibration,
    import_calibration,
    import_calibration_json,
    lookup,
    validate,
)
from .clocks import (  # noqa: F401
    ClockDomainKind,
    ClockModel,
    ReadoutDelaySpec,
    StampedEvent,
    SyncReport,
    apply_readout_correction,
    convert,
    convert_array,
    fit_clock_model,
    read_model,
    simulate_clocks,
    stamp,
    sync_quality,
    write_model,
)
from .allan import (  # noqa: F401
    AllanCurve,
    ImuLog,
    ImuNoiseParams,
    NoiseFit,
    aggregate_params,
    allan_deviation,
    characterize_axes,
    default_tau_grid,
    estimate_noise_density,
    estimate_random_walk,
    read_imu_csv,
)
from .camera import (  # noqa: F401
    CameraIntrinsics,
    ReprojStats,
    backproject,
    colorize_cloud,
    distort_normalized,
    project,
    project_points,
    reprojection_stats,
    undistort_normalized,
)
from .pointcloud import PointCloud, read_ply, write_ply  # noqa: F401
from .trajectory import (  # noqa: F401
    AteReport,
    Trajectory,
    associate,
    ate,
    duration_s,
    load_trajectory,
    save_trajectory,
    trajectory_length,
    umeyama_align,
)
from .dataset import (  # noqa: F401
    SensorSpec,
    SequenceManifest,
    SequenceStats,
    SequenceWriter,
    ValidationPolicy,
    open_stream,
    read_manifest,
    sequence_stats,
    validate_sequence,
)
