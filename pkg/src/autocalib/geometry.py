"""Camera model: pinhole projection, equidistant fisheye, radial polynomial,
ground-plane homography.

Coordinate conventions used throughout the package:

Image frame
    Origin top-left, ``u`` right, ``v`` down, units pixels.  Points are
    real-valued and may lie outside the image bounds (vanishing points
    usually do).  Arrays of points have shape ``(..., 2)``.

Camera frame
    Right-handed: ``x`` right, ``y`` down, ``z`` forward along the
    optical axis.  A world point is visible when its camera-frame depth
    (the projective scale lambda) is positive.

World frame
    The road surface is the ``Z = 0`` plane; its origin is the ground
    point that projects to the image center, in units of the supplied
    camera height.

Normalized coordinates
    Pixels with the intrinsic matrix removed: ``x = (u - W/2)/f``.
    Two flavors circulate: *distorted* (straight from a fisheye image)
    and *undistorted* (pinhole-consistent).  Functions state which one
    they expect; the radius ``r = hypot(x, y)`` of a distorted
    normalized point equals the view angle theta under the equidistant
    model.

Lens models
    Rectilinear: ``r_u = f * tan(theta)``.  Equidistant fisheye:
    ``r_d = f * theta``.  Composing the two gives closed-form pixel
    mappings (`undistort_equidistant` / `distort_equidistant`).  The
    cubic-in-``r^2`` radial polynomial acts on distorted normalized
    coordinates and is fitted to reproduce the same correction.

All angles are radians; degrees appear only at the CLI surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BeyondHemisphere,
    DegenerateHomography,
    NonPositiveDepth,
    PointAtHorizon,
)

# Half-angle guard: the equidistant model covers past 90 deg but the
# rectilinear target diverges there.
MAX_VIEW_ANGLE = (math.pi / 2.0) * (1.0 - 1e-3)

ROTATION_TOL = 1e-9


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole internals: single focal length, principal point at image center."""

    f: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.f > 0 and math.isfinite(self.f)):
            raise ValueError(f"focal length must be positive, got {self.f}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if self.f > self.diagonal:
            raise ValueError(f"focal length {self.f} exceeds image diagonal {self.diagonal:.1f}")

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0

    @property
    def principal_point(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.f, 0.0, self.cx], [0.0, self.f, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class DistortionCoefficients:
    """Radial polynomial over the squared distorted normalized radius."""

    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "k3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3])


@dataclass(frozen=True)
class Pose:
    """Rigid camera pose: ``x_cam = R @ x_world + t``.

    ``t`` is in camera-height units.  Construction verifies R is a
    proper rotation to within 1e-9.
    """

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        R = np.asarray(self.R, dtype=float)
        t = np.asarray(self.t, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise ValueError(f"R must be 3x3, got {R.shape}")
        if np.max(np.abs(R @ R.T - np.eye(3))) > ROTATION_TOL:
            raise ValueError("R is not orthonormal to 1e-9")
        if abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
            raise ValueError("det(R) != +1")
        R = R.copy()
        t = t.copy()
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @property
    def r33(self) -> float:
        return float(self.R[2, 2])


def project_world_to_pixel(
    intrinsics: Intrinsics, pose: Pose, world_points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Project world points through ``K [R|t]``; returns (pixels, depths).

    The depths (projective scales) come back alongside the pixels so
    callers can run cheirality checks without re-deriving them.

    Raises:
        NonPositiveDepth: any point has camera-frame depth <= 0.
    """
    pts = np.asarray(world_points, dtype=float)
    cam = pts @ pose.R.T + pose.t
    depth = cam[..., 2]
    if np.any(depth <= 0):
        raise NonPositiveDepth(f"min depth {np.min(depth):.6g} <= 0")
    u = intrinsics.f * cam[..., 0] / depth + intrinsics.cx
    v = intrinsics.f * cam[..., 1] / depth + intrinsics.cy
    return np.stack([u, v], axis=-1), depth


def normalize_pixel(intrinsics: Intrinsics, pixels: np.ndarray) -> np.ndarray:
    """Remove the intrinsic matrix: ``x = (u - W/2)/f, y = (v - H/2)/f``."""
    p = np.asarray(pixels, dtype=float)
    return (p - intrinsics.principal_point) / intrinsics.f


def denormalize_point(intrinsics: Intrinsics, normalized: np.ndarray) -> np.ndarray:
    """Inverse of :func:`normalize_pixel`."""
    n = np.asarray(normalized, dtype=float)
    return n * intrinsics.f + intrinsics.principal_point


def undistort_equidistant(p_centered: np.ndarray, f: float) -> np.ndarray:
    """Equidistant -> rectilinear on pixel offsets from the principal point.

    Scales each offset by ``tan(theta)/theta`` with ``theta = r_d / f``;
    the scale is exactly 1 at the center.

    Raises:
        BeyondHemisphere: any radius reaches theta >= (pi/2)(1 - 1e-3).
    """
    p = np.asarray(p_centered, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    theta = r / f
    if np.any(theta >= MAX_VIEW_ANGLE):
        raise BeyondHemisphere(
            f"view angle {np.max(theta):.4f} rad >= {MAX_VIEW_ANGLE:.4f}"
        )
    scale = np.ones_like(theta)
    nz = theta > 0
    scale[nz] = np.tan(theta[nz]) / theta[nz]
    return p * scale[..., None]


def distort_equidistant(p_centered: np.ndarray, f: float) -> np.ndarray:
    """Rectilinear -> equidistant on pixel offsets; total (atan never blows up)."""
    p = np.asarray(p_centered, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    scale = np.ones_like(r)
    nz = r > 0
    scale[nz] = f * np.arctan(r[nz] / f) / r[nz]
    return p * scale[..., None]


def apply_polynomial_undistortion(
    normalized: np.ndarray, coefficients: DistortionCoefficients
) -> np.ndarray:
    """Radial polynomial on *distorted* normalized coordinates.

    ``x_u = x_d * (1 + k1 r^2 + k2 r^4 + k3 r^6)`` with
    ``r^2 = x_d^2 + y_d^2``; output keeps the radial direction whenever
    the polynomial factor stays positive.
    """
    n = np.asarray(normalized, dtype=float)
    r2 = n[..., 0] ** 2 + n[..., 1] ** 2
    factor = 1.0 + r2 * (
        coefficients.k1 + r2 * (coefficients.k2 + r2 * coefficients.k3)
    )
    return n * factor[..., None]


def ground_plane_homography(intrinsics: Intrinsics, pose: Pose) -> np.ndarray:
    """Homography ``H = K [r1 | r2 | t]`` mapping (X, Y, 1) on Z=0 to pixels.

    Raises:
        DegenerateHomography: |det H| vanishes relative to the matrix scale.
    """
    H = intrinsics.matrix() @ np.column_stack(
        [pose.R[:, 0], pose.R[:, 1], pose.t]
    )
    scale = np.linalg.norm(H)
    if abs(np.linalg.det(H)) < 1e-12 * max(scale**3, 1e-300):
        raise DegenerateHomography("ground-plane homography is singular")
    return H


def apply_homography(H: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Dehomogenized ``H (x, y, 1)``; negative homogeneous scale is allowed
    (plane mappings are projective; cheirality lives in projection only).
    """
    p = np.asarray(points, dtype=float)
    ones = np.ones(p.shape[:-1] + (1,))
    h = np.concatenate([p, ones], axis=-1) @ H.T
    return h[..., :2] / h[..., 2:3]


def pixel_to_ground(H: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    """Back-project pixels through the inverse homography onto Z=0.

    Raises:
        PointAtHorizon: homogeneous scale vanishes (pixel on the horizon line).
    """
    p = np.asarray(pixels, dtype=float)
    ones = np.ones(p.shape[:-1] + (1,))
    g = np.concatenate([p, ones], axis=-1) @ np.linalg.inv(H).T
    w = g[..., 2]
    limit = 1e-9 * np.max(np.abs(g), axis=-1)
    if np.any(np.abs(w) <= limit):
        raise PointAtHorizon("pixel maps to the plane at infinity")
    return g[..., :2] / g[..., 2:3]
