"""Self-calibration of wide-angle traffic surveillance cameras.

Two stages, both driven by nothing but vehicle motion and the camera's
mounting height: trajectories are straightened to recover focal length
and fisheye distortion, then matched-keypoint segments vote for two
orthogonal vanishing points that fix rotation and height-anchored
translation.
"""

from .errors import (
    BeyondHemisphere,
    CalibrationError,
    CameraSeesNothing,
    ConfigError,
    DegenerateHomography,
    DegenerateObjective,
    DegeneratePoints,
    EmptyCluster,
    EmptyGrid,
    HorizontalCamera,
    InconsistentVPs,
    NonPositiveDepth,
    NoTracks,
    ParallelVPs,
    ParseError,
    PointAtHorizon,
    RankDeficient,
    SchemaVersionMismatch,
    SingularInput,
    Unimodal,
)
from .extrinsics import (
    ExtrinsicResult,
    GridConfig,
    LineSegment,
    VoteGrid,
    calibrate_extrinsics,
    cluster_segments,
    estimate_vanishing_point,
    load_matches,
    orientation_peaks,
    orthonormalize_rotation,
    refine_focal_from_vps,
    rotation_from_vps,
    segments_from_matches,
    translation_from_height,
    vote_lines,
)
from .geometry import (
    DistortionCoefficients,
    Intrinsics,
    Pose,
    apply_homography,
    apply_polynomial_undistortion,
    denormalize_point,
    distort_equidistant,
    ground_plane_homography,
    normalize_pixel,
    pixel_to_ground,
    project_world_to_pixel,
    undistort_equidistant,
)
from .intrinsics import (
    FocalSearchConfig,
    IntrinsicResult,
    build_intrinsics,
    calibrate_intrinsics,
    estimate_focal,
    fit_distortion_coefficients,
    straightness_objective,
)
from .simulate import (
    RecoveryReport,
    SceneSpec,
    build_pose,
    evaluate_recovery,
    generate_scene,
    true_vanishing_points,
)
from .topview import TopviewGrid, TopviewSpec, topview_grid, warp_image
from .tracks import (
    Track,
    VideoMeta,
    filter_tracks,
    fit_line,
    load_tracks,
    select_calibration_tracks,
)

__version__ = "0.1.0"
