"""Ground-plane rectification: remap grids from calibration, plus warping.

A calibrated camera induces a homography between the road plane and the
undistorted image.  Walking a metric grid over the ground and chaining
grid point -> homography -> equidistant distortion yields, for every
output cell, the source pixel of the original (distorted) frame — a
remap that renders the scene as seen from straight above, where lane
markings run parallel instead of converging.

Output layout: world X grows along output columns, world Y grows upward
(row 0 is Y_max), one cell per 1/resolution height units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DistortionCoefficients,
    Intrinsics,
    Pose,
    distort_equidistant,
    ground_plane_homography,
)


@dataclass(frozen=True)
class TopviewSpec:
    """Ground extent in camera-height units and output pixel density."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: float  # output pixels per ground unit

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("ground extent is empty")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        rows = int(math.ceil((self.y_max - self.y_min) * self.resolution - 1e-9))
        cols = int(math.ceil((self.x_max - self.x_min) * self.resolution - 1e-9))
        return rows, cols

    def cell_ground(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Ground (X, Y) of output cell centers."""
        x = self.x_min + (np.asarray(cols, dtype=float) + 0.5) / self.resolution
        y = self.y_max - (np.asarray(rows, dtype=float) + 0.5) / self.resolution
        return np.stack([x, y], axis=-1)


@dataclass(frozen=True)
class TopviewGrid:
    spec: TopviewSpec
    source: np.ndarray  # (rows, cols, 2) distorted source pixel (u, v)
    valid: np.ndarray  # (rows, cols) bool

    def to_json_dict(self) -> dict:
        return {
            "extent": [self.spec.x_min, self.spec.x_max, self.spec.y_min, self.spec.y_max],
            "resolution": self.spec.resolution,
            "source": self.source.tolist(),
            "valid": self.valid.astype(int).tolist(),
        }


def topview_grid(
    intrinsics: Intrinsics,
    coefficients: DistortionCoefficients,
    pose: Pose,
    spec: TopviewSpec,
) -> TopviewGrid:
    """Source-pixel lookup for every output cell of the top view.

    A cell is valid when its ground point lies in front of the camera
    (positive depth through the homography) and its distorted source
    position falls inside the image.  ``coefficients`` are accepted for
    interface symmetry with the undistortion path; the forward warp uses
    the exact equidistant model rather than the fitted polynomial.

    Raises:
        DegenerateHomography: calibration collapses the ground plane.
    """
    del coefficients  # exact model used forward; see docstring
    H = ground_plane_homography(intrinsics, pose)
    rows, cols = spec.shape
    r_idx, c_idx = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    ground = spec.cell_ground(r_idx, c_idx).reshape(-1, 2)
    ones = np.ones((ground.shape[0], 1))
    projected = np.hstack([ground, ones]) @ H.T
    depth = projected[:, 2]
    in_front = depth > 0
    safe = np.where(in_front, depth, 1.0)
    undist = projected[:, :2] / safe[:, None]

    centered = undist - np.array(intrinsics.principal_point)
    distorted = distort_equidistant(centered, intrinsics.f) + np.array(
        intrinsics.principal_point
    )
    u, v = distorted[:, 0], distorted[:, 1]
    valid = (
        in_front
        & (u >= 0)
        & (u < intrinsics.width)
        & (v >= 0)
        & (v < intrinsics.height)
    )
    return TopviewGrid(
        spec=spec,
        source=distorted.reshape(rows, cols, 2),
        valid=valid.reshape(rows, cols),
    )


def warp_image(image: np.ndarray, grid: TopviewGrid, mode: str = "bilinear") -> np.ndarray:
    """Resample a distorted source frame through a top-view grid.

    Invalid cells come out zero.  ``mode`` is "nearest" or "bilinear";
    bilinear clamps at the image border.
    """
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[:, :, None]
        squeeze = True
    elif image.ndim == 3:
        squeeze = False
    else:
        raise ValueError("image must be (H, W) or (H, W, C)")
    h, w = image.shape[:2]
    rows, cols = grid.valid.shape
    out = np.zeros((rows, cols, image.shape[2]), dtype=float)
    src = grid.source[grid.valid]
    if src.size:
        u, v = src[:, 0], src[:, 1]
        if mode == "nearest":
            ui = np.clip(np.round(u).astype(int), 0, w - 1)
            vi = np.clip(np.round(v).astype(int), 0, h - 1)
            samples = image[vi, ui].astype(float)
        elif mode == "bilinear":
            u = np.clip(u, 0.0, w - 1.0)
            v = np.clip(v, 0.0, h - 1.0)
            u0 = np.clip(np.floor(u).astype(int), 0, w - 2) if w > 1 else np.zeros(u.shape, int)
            v0 = np.clip(np.floor(v).astype(int), 0, h - 2) if h > 1 else np.zeros(v.shape, int)
            fu = (u - u0)[:, None]
            fv = (v - v0)[:, None]
            u1 = np.minimum(u0 + 1, w - 1)
            v1 = np.minimum(v0 + 1, h - 1)
            samples = (
                image[v0, u0] * (1 - fu) * (1 - fv)
                + image[v0, u1] * fu * (1 - fv)
                + image[v1, u0] * (1 - fu) * fv
                + image[v1, u1] * fu * fv
            )
        else:
            raise ValueError(f"unknown sampling mode {mode!r}")
        out[grid.valid] = samples
    return out[:, :, 0] if squeeze else out
