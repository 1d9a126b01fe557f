"""Synthetic traffic scenes with known calibration, and recovery scoring.

The generator drives rigid keypoint clusters ("vehicles") along straight
ground-plane lines in two perpendicular world directions, projects them
through a known pinhole + equidistant fisheye camera, adds pixel noise,
and emits the exact track/match file schemas the calibration stages
consume.  Everything is reproducible from the seed.

Conventions: world Z is up, the road is Z = 0, and the world origin is
the point where the optical axis meets the road (so it projects to the
image center by construction).  ``pitch`` is the angle of the optical
axis below the horizon (90 = straight down), ``yaw`` spins the heading
about world Z, ``roll`` turns about the optical axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CameraSeesNothing
from .extrinsics import SEGMENTS_SCHEMA, ExtrinsicResult, translation_from_height
from .geometry import Intrinsics, Pose, distort_equidistant
from .intrinsics import IntrinsicResult
from .tracks import TRACKS_SCHEMA

_DEGENERATE_VP_TOL = 1e-9


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to generate one deterministic scene."""

    f: float = 800.0
    width: int = 1280
    height: int = 720
    pitch_deg: float = 35.0
    yaw_deg: float = 45.0
    roll_deg: float = 0.0
    camera_height: float = 9.0
    vehicles_per_direction: int = 8
    keypoints_per_vehicle: int = 10
    speed_range: tuple[float, float] = (0.20, 0.32)
    lane_half_span: float = 5.0
    frame_count: int = 150
    stride: int = 6
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.camera_height <= 0:
            raise ValueError("camera_height must be positive")
        if self.frame_count < 2 or self.stride < 1:
            raise ValueError("need at least 2 frames and stride >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise ValueError("speed_range must be positive and ordered")

    @property
    def intrinsics(self) -> Intrinsics:
        return Intrinsics(f=self.f, width=self.width, height=self.height)


def _rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def build_pose(
    pitch_deg: float, yaw_deg: float, roll_deg: float, camera_height: float
) -> Pose:
    """Pose of a camera ``camera_height`` above the origin-crossing road.

    Starts from a straight-down camera whose image x runs along world X
    (rotation diag(1, -1, -1)), tilts it up toward the horizon by
    90 - pitch about the camera x axis (the far road recedes toward the
    image top), rolls about the optical axis, and finally yaws the whole
    rig about world Z.  Translation keeps (0, 0, 0) on the optical axis,
    which puts the camera center at height ``camera_height``.

    Raises:
        HorizontalCamera: pitch = 0 (axis on the horizon) leaves the
            height unusable.
    """
    R = (
        _rot_z(roll_deg)
        @ _rot_x(pitch_deg - 90.0)
        @ np.diag([1.0, -1.0, -1.0])
        @ _rot_z(-yaw_deg)
    )
    t = translation_from_height(R, camera_height)
    return Pose(R, t)


def true_vanishing_points(
    intrinsics: Intrinsics, pose: Pose
) -> tuple[tuple[float, float] | None, tuple[float, float] | None]:
    """Undistorted-image vanishing points of the world X and Y axes.

    ``None`` marks an axis parallel to the image plane (point at
    infinity) — a straight-down camera degenerates both.
    """
    cx, cy = intrinsics.principal_point
    out: list[tuple[float, float] | None] = []
    for col in (0, 1):
        d = pose.R[:, col]
        if abs(d[2]) < _DEGENERATE_VP_TOL:
            out.append(None)
        else:
            out.append((cx + intrinsics.f * d[0] / d[2], cy + intrinsics.f * d[1] / d[2]))
    return out[0], out[1]


def _observe(
    spec: SceneSpec, pose: Pose, world: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Project one keypoint's per-frame world positions into noisy pixels.

    Returns ``(visible mask, (T, 2) distorted pixels)``; pixels on
    masked-out frames are meaningless.  Visibility is judged on the
    noise-free point: positive depth and distorted position inside the
    frame.
    """
    cam = world @ pose.R.T + pose.t
    in_front = np.nonzero(cam[:, 2] > 0.0)[0]
    pixels = np.zeros((world.shape[0], 2))
    visible = np.zeros(world.shape[0], dtype=bool)
    if in_front.size:
        sub = cam[in_front]
        centered = spec.f * sub[:, :2] / sub[:, 2:3]
        distorted = distort_equidistant(centered, spec.f)
        u = distorted[:, 0] + spec.width / 2.0
        v = distorted[:, 1] + spec.height / 2.0
        in_frame = (u >= 0) & (u < spec.width) & (v >= 0) & (v < spec.height)
        pixels[in_front] = np.stack([u, v], axis=1)
        visible[in_front[in_frame]] = True
    if spec.noise_sigma > 0:
        pixels = pixels + rng.normal(0.0, spec.noise_sigma, size=pixels.shape)
    return visible, pixels


def generate_scene(spec: SceneSpec) -> tuple[dict, dict, dict]:
    """Build one scene: returns (tracks document, matches document, truth).

    The two documents follow the trajectory and match file schemas; the
    truth record carries the generating calibration plus the true
    vanishing points (``degenerate_vps`` set, and VPs null, when a road
    direction is parallel to the image plane).

    Raises:
        CameraSeesNothing: no keypoint is visible on 2+ frames.
    """
    rng = np.random.default_rng(spec.seed)
    pose = build_pose(spec.pitch_deg, spec.yaw_deg, spec.roll_deg, spec.camera_height)
    frames = np.arange(spec.frame_count)

    tracks: list[dict] = []
    matches: list[list[float]] = []
    track_id = 0
    for direction in (0, 1):
        along_axis = np.zeros(3)
        along_axis[direction] = 1.0
        cross_axis = np.zeros(3)
        cross_axis[1 - direction] = 1.0
        n_veh = spec.vehicles_per_direction
        # evenly spaced lanes with jitter small enough that no two
        # vehicles share a world line (overlapping lines would stack
        # their votes into false accumulator peaks)
        spacing = 2.0 * spec.lane_half_span / max(n_veh - 1, 1)
        for i in range(n_veh):
            speed = rng.uniform(*spec.speed_range) * rng.choice([-1.0, 1.0])
            lane = -spec.lane_half_span + i * spacing + rng.uniform(-0.15, 0.15) * spacing
            # phased so the vehicle straddles the origin mid-video
            start = -speed * spec.frame_count / 2.0 + rng.uniform(-2.0, 2.0)
            # keypoints spread across the vehicle, cross positions spaced
            # out for the same no-shared-world-line reason as the lanes
            n_kp = spec.keypoints_per_vehicle
            cross = np.linspace(-0.6, 0.6, n_kp) if n_kp > 1 else np.zeros(1)
            cross = cross + rng.uniform(-0.02, 0.02, n_kp)
            offsets = np.stack([rng.uniform(-1.0, 1.0, n_kp), cross], axis=1)
            for d_along, d_cross in offsets:
                along = start + d_along + speed * frames
                world = (
                    along[:, None] * along_axis
                    + (lane + d_cross) * cross_axis
                )
                visible, pixels = _observe(spec, pose, world, rng)
                idx = np.nonzero(visible)[0]
                if idx.size >= 2:
                    tracks.append(
                        {
                            "id": track_id,
                            "points": [
                                [int(t), float(pixels[t, 0]), float(pixels[t, 1])]
                                for t in idx
                            ],
                        }
                    )
                track_id += 1
                pairs = idx[np.isin(idx + spec.stride, idx)]
                for a in pairs:
                    b = a + spec.stride
                    matches.append(
                        [
                            int(a),
                            int(b),
                            float(pixels[a, 0]),
                            float(pixels[a, 1]),
                            float(pixels[b, 0]),
                            float(pixels[b, 1]),
                        ]
                    )
    if not tracks:
        raise CameraSeesNothing("no vehicle keypoint is visible on two or more frames")

    tracks_doc = {
        "schema": TRACKS_SCHEMA,
        "video": {
            "width": spec.width,
            "height": spec.height,
            "frame_count": spec.frame_count,
            "fps": 30.0,
        },
        "tracks": tracks,
    }
    matches_doc = {"schema": SEGMENTS_SCHEMA, "stride": spec.stride, "matches": matches}

    vp_x, vp_y = true_vanishing_points(spec.intrinsics, pose)
    truth = {
        "f": spec.f,
        "dist_model": "equidistant",
        "R": pose.R.tolist(),
        "t": list(pose.t),
        "height": spec.camera_height,
        "image_width": spec.width,
        "image_height": spec.height,
        "vp_x": list(vp_x) if vp_x is not None else None,
        "vp_y": list(vp_y) if vp_y is not None else None,
        "degenerate_vps": vp_x is None or vp_y is None,
        "seed": spec.seed,
        "noise_sigma": spec.noise_sigma,
    }
    return tracks_doc, matches_doc, truth


# ---------------------------------------------------------------------------
# recovery scoring

def _axis_relabelings() -> list[np.ndarray]:
    """The 8 proper rotations that permute/flip the two ground axes.

    The estimated world frame is only defined up to which road is "x",
    the sign of each road direction, and the induced normal flip; all
    such relabelings are proper signed permutations fixing span(X, Y).
    """
    out = []
    for swap in (False, True):
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                Q = np.zeros((3, 3))
                a, b = (1, 0) if swap else (0, 1)
                Q[a, 0] = s1
                Q[b, 1] = s2
                Q[2, 2] = s1 * s2 * (-1.0 if swap else 1.0)
                out.append(Q)
    return out


def rotation_angle_deg(Ra: np.ndarray, Rb: np.ndarray) -> float:
    """Geodesic angle between two rotations, degrees."""
    cosine = (np.trace(Ra.T @ Rb) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, cosine))))


@dataclass(frozen=True)
class RecoveryReport:
    focal_error_pct: float | None
    f_new_error_pct: float | None
    rotation_error_deg: float | None
    vp_errors_px: tuple[float, float] | None
    translation_error_pct: float | None
    residuals: dict

    def to_json_dict(self) -> dict:
        return {
            "focal_error_pct": self.focal_error_pct,
            "f_new_error_pct": self.f_new_error_pct,
            "rotation_error_deg": self.rotation_error_deg,
            "vp_errors_px": list(self.vp_errors_px) if self.vp_errors_px else None,
            "translation_error_pct": self.translation_error_pct,
            "residuals": self.residuals,
        }


def evaluate_recovery(
    truth: dict,
    intrinsic_result: IntrinsicResult | None,
    extrinsic_result: ExtrinsicResult | None,
) -> RecoveryReport:
    """Score recovered calibration against the generating truth.

    Rotation error is the geodesic angle minimized over the 8 ground-axis
    relabelings (the estimator cannot know which road is world X or which
    way traffic counts as positive).  Vanishing-point errors use the
    pairing with the smaller total distance, and translation is compared
    through |t_z| since its sign follows the normal choice.
    """
    f_true = float(truth["f"])
    focal_error = None
    residuals: dict = {}
    if intrinsic_result is not None:
        focal_error = abs(intrinsic_result.intrinsics.f - f_true) / f_true * 100.0
        report = intrinsic_result.residual_report
        if report:
            residuals["straightening_before_mean"] = float(
                np.mean([r.before for r in report])
            )
            residuals["straightening_after_mean"] = float(
                np.mean([r.after for r in report])
            )

    f_new_error = rotation_error = translation_error = None
    vp_errors = None
    if extrinsic_result is not None:
        f_new_error = abs(extrinsic_result.f_new - f_true) / f_true * 100.0
        R_true = np.asarray(truth["R"], dtype=float)
        rotation_error = min(
            rotation_angle_deg(extrinsic_result.pose.R, R_true @ Q)
            for Q in _axis_relabelings()
        )
        t_true = float(truth["t"][2])
        t_est = float(extrinsic_result.pose.t[2])
        translation_error = abs(abs(t_est) - abs(t_true)) / abs(t_true) * 100.0
        if not truth.get("degenerate_vps") and truth.get("vp_x") and truth.get("vp_y"):
            vps_true = np.array([truth["vp_x"], truth["vp_y"]], dtype=float)
            vps_est = np.array([extrinsic_result.vp_x, extrinsic_result.vp_y])
            direct = np.linalg.norm(vps_est - vps_true, axis=1)
            crossed = np.linalg.norm(vps_est - vps_true[::-1], axis=1)
            pair = direct if direct.sum() <= crossed.sum() else crossed
            vp_errors = (float(pair[0]), float(pair[1]))

    return RecoveryReport(
        focal_error_pct=focal_error,
        f_new_error_pct=f_new_error,
        rotation_error_deg=rotation_error,
        vp_errors_px=vp_errors,
        translation_error_pct=translation_error,
        residuals=residuals,
    )
