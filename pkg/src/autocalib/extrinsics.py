"""Extrinsic calibration from two orthogonal vanishing points.

Matched keypoints a fixed frame stride apart give short line segments in
the undistorted image.  Traffic moves along two roughly perpendicular
ground directions, so segment orientations are bimodal; each mode's
segments are extended to full lines and rasterized into a coarse
accumulator (1 px cells spanning 3x the image, because vanishing points
usually land outside the frame).  The brightest accumulator cells of
each mode locate a vanishing point, the two points refine the focal
length, and their back-projected directions assemble the rotation.
Translation is fixed by the known camera height above the road plane.

All pixel coordinates in this module are undistorted-image coordinates
unless a name says otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import jsonio
from ._kernels import vote_segments
from .errors import (
    EmptyCluster,
    EmptyGrid,
    HorizontalCamera,
    InconsistentVPs,
    ParallelVPs,
    ParseError,
    SchemaVersionMismatch,
    SingularInput,
    Unimodal,
)
from .geometry import (
    DistortionCoefficients,
    Intrinsics,
    Pose,
    apply_polynomial_undistortion,
    denormalize_point,
    normalize_pixel,
)

log = logging.getLogger(__name__)

SEGMENTS_SCHEMA = "autocalib-segments/1"


# ---------------------------------------------------------------------------
# segments

@dataclass(frozen=True)
class LineSegment:
    """Directed segment between two undistorted pixel positions.

    ``orientation`` is the undirected line angle in degrees on [0, 180).
    ``distance`` is the signed distance of the line from the pixel
    origin along the left normal of the direction vector.
    """

    p1: tuple[float, float]
    p2: tuple[float, float]

    def __post_init__(self) -> None:
        if self.magnitude <= 0.0:
            raise ValueError("degenerate segment: endpoints coincide")

    @property
    def magnitude(self) -> float:
        return math.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1])

    @property
    def orientation(self) -> float:
        angle = math.degrees(math.atan2(self.p2[1] - self.p1[1], self.p2[0] - self.p1[0]))
        return angle % 180.0

    @property
    def distance(self) -> float:
        theta = math.radians(self.orientation)
        # left normal of the direction (cos, sin)
        return -math.sin(theta) * self.p1[0] + math.cos(theta) * self.p1[1]


def load_matches(path: str | Path) -> tuple[int, np.ndarray]:
    """Read a keypoint-match file into ``(stride, matches)``.

    ``matches`` is a float array of rows ``(frame_a, frame_b, u1, v1,
    u2, v2)`` in distorted pixel coordinates.

    Raises:
        ParseError: structural problems, or a match whose frame gap is
            not the declared stride.
        SchemaVersionMismatch: unknown schema tag.
    """
    path = Path(path)
    raw = jsonio.load(path)
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: expected a JSON object")
    schema = raw.get("schema")
    if schema != SEGMENTS_SCHEMA:
        raise SchemaVersionMismatch(f"{path}: schema {schema!r}, expected {SEGMENTS_SCHEMA!r}")
    try:
        stride = int(raw["stride"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad or missing stride") from exc
    if stride < 1:
        raise ParseError(f"{path}: stride must be >= 1, got {stride}")
    rows = raw.get("matches")
    if not isinstance(rows, list):
        raise ParseError(f"{path}: missing matches array")
    try:
        matches = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:  # ragged or non-numeric rows
        raise ParseError(f"{path}: matches must be rows of 6 numbers") from exc
    if matches.size == 0:
        matches = matches.reshape(0, 6)
    if matches.ndim != 2 or matches.shape[1] != 6:
        raise ParseError(f"{path}: matches must be rows of 6 numbers")
    if not np.all(np.isfinite(matches)):
        raise ParseError(f"{path}: non-finite match entries")
    gaps = matches[:, 1] - matches[:, 0]
    if matches.shape[0] and not np.all(gaps == stride):
        bad = int(np.argmax(gaps != stride))
        raise ParseError(f"{path}: matches[{bad}] frame gap {gaps[bad]:g} != stride {stride}")
    return stride, matches


def segments_from_matches(
    matches: np.ndarray,
    intrinsics: Intrinsics,
    coefficients: DistortionCoefficients,
    min_length: float = 2.0,
) -> list[LineSegment]:
    """Undistort matched keypoint pairs and keep the segments worth voting on.

    ``matches`` rows are ``(frame_a, frame_b, u1, v1, u2, v2)`` with
    positions in the distorted original image.  Both endpoints go
    through the polynomial undistortion; segments shorter than
    ``min_length`` pixels afterwards are dropped (they carry mostly
    noise), never raised on.
    """
    matches = np.asarray(matches, dtype=float)
    if matches.size == 0:
        return []
    ends = matches[:, 2:6].reshape(-1, 2)
    undist = denormalize_point(
        intrinsics, apply_polynomial_undistortion(normalize_pixel(intrinsics, ends), coefficients)
    ).reshape(-1, 4)
    lengths = np.hypot(undist[:, 2] - undist[:, 0], undist[:, 3] - undist[:, 1])
    segments = [
        LineSegment((row[0], row[1]), (row[2], row[3]))
        for row, keep in zip(undist, lengths >= min_length)
        if keep
    ]
    log.debug("kept %d/%d segments (min_length %.1f px)", len(segments), len(matches), min_length)
    return segments


# ---------------------------------------------------------------------------
# orientation histogram

@dataclass(frozen=True)
class OrientationHistogram:
    """Magnitude-weighted counts over [0, 180) degree bins."""

    bin_width: float
    counts: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.counts.size) + 0.5) * self.bin_width


def _circular_distance(a: float, b: float) -> float:
    """Distance between undirected orientations, degrees on [0, 90]."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def orientation_histogram(
    segments: Sequence[LineSegment], bin_width: float = 1.0
) -> OrientationHistogram:
    n_bins = int(round(180.0 / bin_width))
    if not math.isclose(n_bins * bin_width, 180.0):
        raise ValueError("bin_width must divide 180")
    counts = np.zeros(n_bins)
    for seg in segments:
        counts[min(int(seg.orientation / bin_width), n_bins - 1)] += seg.magnitude
    return OrientationHistogram(bin_width=bin_width, counts=counts)


def orientation_peaks(
    segments: Sequence[LineSegment],
    bin_width: float = 1.0,
    min_separation: float = 30.0,
) -> tuple[float, float]:
    """Locate the two dominant traffic directions.

    Builds the magnitude-weighted orientation histogram, takes its
    highest bin, then the highest bin at circular distance greater than
    ``min_separation`` — two bins of one lobe must not pass as a pair.
    Each peak is sharpened to the weighted mean orientation of the
    segments inside its bin.  Returns ``(theta_1, theta_2)`` with the
    stronger peak first.

    Raises:
        Unimodal: fewer than 2 segments, or no second mode at least 20%
            of the first outside the separation window.
    """
    if len(segments) < 2:
        raise Unimodal("need at least two segments for a bimodal histogram")
    hist = orientation_histogram(segments, bin_width)
    centers = hist.bin_centers
    first = int(np.argmax(hist.counts))
    eligible = np.array(
        [_circular_distance(c, centers[first]) > min_separation for c in centers]
    )
    if not eligible.any():
        raise Unimodal("no bins outside the separation window")
    masked = np.where(eligible, hist.counts, -1.0)
    second = int(np.argmax(masked))
    if hist.counts[second] < 0.2 * hist.counts[first]:
        raise Unimodal(
            f"second mode {hist.counts[second]:.1f} below 20% of first {hist.counts[first]:.1f}"
        )
    return (
        _bin_mean_orientation(segments, hist, first),
        _bin_mean_orientation(segments, hist, second),
    )


def _bin_mean_orientation(
    segments: Sequence[LineSegment], hist: OrientationHistogram, bin_index: int
) -> float:
    """Magnitude-weighted mean orientation of the segments in one bin."""
    lo = bin_index * hist.bin_width
    hi = lo + hist.bin_width
    total = weight = 0.0
    for seg in segments:
        if lo <= seg.orientation < hi:
            total += seg.magnitude * seg.orientation
            weight += seg.magnitude
    # the bin was chosen from the same data, so weight > 0
    return total / weight


def cluster_segments(
    segments: Sequence[LineSegment], peak: float, half_width: float = 5.0
) -> list[LineSegment]:
    """Segments within ``half_width`` degrees (circular) of the peak orientation.

    Raises:
        EmptyCluster: nothing qualifies.
    """
    cluster = [s for s in segments if _circular_distance(s.orientation, peak) <= half_width]
    if not cluster:
        raise EmptyCluster(f"no segments within {half_width} degrees of {peak:.1f}")
    return cluster


# ---------------------------------------------------------------------------
# accumulator voting

@dataclass(frozen=True)
class GridConfig:
    """Accumulator layout: ``cell``-pixel cells, origin at pixel (u0, v0)."""

    u0: float
    v0: float
    cols: int
    rows: int
    cell: float = 1.0

    @classmethod
    def for_image(cls, width: int, height: int, scale: float = 3.0, cell: float = 1.0) -> "GridConfig":
        """Extent ``scale`` times the image, centered on it."""
        span_u, span_v = scale * width, scale * height
        return cls(
            u0=(width - span_u) / 2.0,
            v0=(height - span_v) / 2.0,
            cols=int(math.ceil(span_u / cell)),
            rows=int(math.ceil(span_v / cell)),
            cell=cell,
        )

    def __post_init__(self) -> None:
        if self.cols < 1 or self.rows < 1 or self.cell <= 0:
            raise ValueError("grid must have positive extent and cell size")


@dataclass(frozen=True)
class VoteGrid:
    config: GridConfig
    counts: np.ndarray  # (rows, cols) int64

    def cell_centers(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Pixel coordinates of cell centers, as (N, 2) columns (u, v)."""
        cfg = self.config
        u = cfg.u0 + (np.asarray(cols, dtype=float) + 0.5) * cfg.cell
        v = cfg.v0 + (np.asarray(rows, dtype=float) + 0.5) * cfg.cell
        return np.stack([u, v], axis=1)


def vote_lines(cluster: Sequence[LineSegment], config: GridConfig) -> VoteGrid:
    """Extend every segment to a full line and rasterize it into the grid.

    A line increments each touched cell by exactly one: one cell per
    grid column for x-major lines (per row for y-major), at the row the
    line crosses the column's center.
    """
    counts = np.zeros((config.rows, config.cols), dtype=np.int64)
    if cluster:
        segs = np.array(
            [[s.p1[0], s.p1[1], s.p2[0], s.p2[1]] for s in cluster], dtype=float
        )
        vote_segments(counts, segs, config.u0, config.v0, config.cell)
    return VoteGrid(config=config, counts=counts)


def estimate_vanishing_point(
    grid: VoteGrid, top_fraction: float = 0.20, k_sigma: float = 2.0
) -> tuple[tuple[float, float], dict]:
    """Vanishing point from the brightest accumulator cells.

    Cells holding at least ``(1 - top_fraction)`` of the maximum count
    form the peak cloud.  The estimate is the cloud's vote-weighted mean
    pushed ``k_sigma`` standard deviations along its principal axis:
    when the point of convergence sits beyond the densest votes the
    cloud is a one-sided smear, and the displacement (signed toward the
    tightest 1% of cells) walks up it.  With a compact cloud sigma is
    sub-cell and the push is harmless.

    Returns the estimate in pixel coordinates plus a diagnostics dict
    (mean, per-axis std, axis, counts).

    Raises:
        EmptyGrid: no votes at all.
    """
    if not 0.0 < top_fraction <= 1.0:
        raise ValueError("top_fraction must be in (0, 1]")
    if not 0.0 <= k_sigma <= 3.0:
        raise ValueError("k_sigma must be in [0, 3]")
    counts = grid.counts
    max_count = int(counts.max()) if counts.size else 0
    if max_count <= 0:
        raise EmptyGrid("accumulator holds no votes")

    threshold = (1.0 - top_fraction) * max_count
    rows, cols = np.nonzero(counts >= threshold)
    weights = counts[rows, cols].astype(float)
    centers = grid.cell_centers(rows, cols)
    mean = np.average(centers, axis=0, weights=weights)
    deviations = centers - mean
    std_axis_wise = np.sqrt(np.average(deviations**2, axis=0, weights=weights))

    # principal direction of the weighted cloud
    cov = (deviations * weights[:, None]).T @ deviations / weights.sum()
    eigvals, eigvecs = np.linalg.eigh(cov)
    direction = eigvecs[:, -1]
    sigma = math.sqrt(max(eigvals[-1], 0.0))

    # sign: toward the very brightest cells
    top_rows, top_cols = np.nonzero(counts >= 0.99 * max_count)
    top_weights = counts[top_rows, top_cols].astype(float)
    top_mean = np.average(grid.cell_centers(top_rows, top_cols), axis=0, weights=top_weights)
    along = float((top_mean - mean) @ direction)
    if along < 0.0:
        direction = -direction
    elif along == 0.0 and (direction[0] < 0.0 or (direction[0] == 0.0 and direction[1] < 0.0)):
        direction = -direction

    estimate = mean + k_sigma * sigma * direction
    diagnostics = {
        "mean": [float(mean[0]), float(mean[1])],
        "std": [float(std_axis_wise[0]), float(std_axis_wise[1])],
        "sigma_axis": sigma,
        "axis": [float(direction[0]), float(direction[1])],
        "cells": int(rows.size),
        "max_count": max_count,
        "threshold": threshold,
    }
    return (float(estimate[0]), float(estimate[1])), diagnostics


def save_vote_map(grid: VoteGrid, path: str | Path) -> None:
    """Dump the accumulator as a grayscale PNG, max count mapped to 255."""
    from PIL import Image

    counts = grid.counts
    peak = counts.max()
    image = (counts * (255.0 / peak) if peak > 0 else counts).astype(np.uint8)
    Image.fromarray(image, mode="L").save(Path(path))


# ---------------------------------------------------------------------------
# pose recovery

def refine_focal_from_vps(
    vp_x: tuple[float, float], vp_y: tuple[float, float], principal_point: tuple[float, float]
) -> float:
    """Focal length from orthogonality of the two vanishing directions.

    With both directions on the ground and perpendicular,
    (vp_x - c) . (vp_y - c) + f^2 = 0, so f = sqrt(-(dot product)).
    Symmetric in the two points.

    Raises:
        InconsistentVPs: radicand <= 0 — the points do not subtend a
            right angle from any focal distance.
    """
    cx, cy = principal_point
    radicand = -((vp_x[0] - cx) * (vp_y[0] - cx) + (vp_x[1] - cy) * (vp_y[1] - cy))
    if radicand <= 0.0:
        raise InconsistentVPs(f"orthogonality radicand {-radicand:.3g} is not negative")
    return math.sqrt(radicand)


def rotation_from_vps(
    vp_x: tuple[float, float],
    vp_y: tuple[float, float],
    f_new: float,
    principal_point: tuple[float, float],
) -> np.ndarray:
    """Raw rotation: world axes as viewing directions of the vanishing points.

    Column i is the normalized camera-frame direction of vanishing
    point i, (vp - c, f_new) with f_new > 0 so both ground axes point in
    front of the camera; the third column is their cross product.  The
    result is only as orthogonal as the vanishing points are consistent
    — run it through orthonormalize_rotation before building a Pose.

    Raises:
        ParallelVPs: the two directions are closer than ~60 degrees
            (|col1 . col2| > 0.5).
    """
    if f_new <= 0.0:
        raise ValueError("f_new must be positive")
    cx, cy = principal_point
    col1 = np.array([vp_x[0] - cx, vp_x[1] - cy, f_new])
    col2 = np.array([vp_y[0] - cx, vp_y[1] - cy, f_new])
    col1 /= np.linalg.norm(col1)
    col2 /= np.linalg.norm(col2)
    if abs(float(col1 @ col2)) > 0.5:
        raise ParallelVPs(f"vanishing directions too close: cos = {float(col1 @ col2):.3f}")
    col3 = np.cross(col1, col2)
    R = np.stack([col1, col2, col3], axis=1)
    if np.linalg.det(R) < 0.0:
        R[:, 2] = -R[:, 2]
    return R


def orthonormalize_rotation(R_raw: np.ndarray) -> np.ndarray:
    """Nearest proper rotation in Frobenius norm, via SVD.

    Raises:
        SingularInput: R_raw is (numerically) rank-deficient.
    """
    R_raw = np.asarray(R_raw, dtype=float)
    if R_raw.shape != (3, 3) or not np.all(np.isfinite(R_raw)):
        raise SingularInput("expected a finite 3x3 matrix")
    U, S, Vt = np.linalg.svd(R_raw)
    if S[-1] <= 1e-12 * max(S[0], 1e-300):
        raise SingularInput("matrix is numerically singular")
    D = np.diag([1.0, 1.0, float(np.sign(np.linalg.det(U @ Vt)))])
    return U @ D @ Vt


def translation_from_height(R: np.ndarray, height: float) -> np.ndarray:
    """Translation placing the camera ``height`` above the world ground plane.

    The world origin is pinned under the optical axis on the ground, so
    t = (0, 0, -height / r33).

    Raises:
        HorizontalCamera: optical axis parallel to the ground
            (|r33| <= 1e-6), height cannot anchor the translation.
    """
    r33 = float(np.asarray(R)[2, 2])
    if abs(r33) <= 1e-6:
        raise HorizontalCamera(f"r33 = {r33:.2e}, camera looks along the horizon")
    return np.array([0.0, 0.0, -height / r33])


# ---------------------------------------------------------------------------
# orchestration

@dataclass(frozen=True)
class ExtrinsicResult:
    f_new: float
    pose: Pose
    vp_x: tuple[float, float]
    vp_y: tuple[float, float]
    height: float
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "f_new": self.f_new,
            "R": self.pose.R.tolist(),
            "t": list(self.pose.t),
            "vp_x": list(self.vp_x),
            "vp_y": list(self.vp_y),
            "height": self.height,
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "ExtrinsicResult":
        return cls(
            f_new=float(raw["f_new"]),
            pose=Pose(np.asarray(raw["R"], dtype=float), np.asarray(raw["t"], dtype=float)),
            vp_x=(float(raw["vp_x"][0]), float(raw["vp_x"][1])),
            vp_y=(float(raw["vp_y"][0]), float(raw["vp_y"][1])),
            height=float(raw["height"]),
        )


def calibrate_extrinsics(
    matches: np.ndarray,
    intrinsics: Intrinsics,
    coefficients: DistortionCoefficients,
    height: float,
    grid: GridConfig | None = None,
    min_length: float = 2.0,
    bin_width: float = 1.0,
    min_separation: float = 30.0,
    half_width: float = 5.0,
    top_fraction: float = 0.20,
    k_sigma: float = 2.0,
    keep_grids: bool = False,
) -> ExtrinsicResult:
    """Full extrinsic stage: segments, peaks, voting, pose.

    ``matches`` rows are ``(frame_a, frame_b, u1, v1, u2, v2)`` in
    distorted pixels; ``height`` is the camera height above the road in
    world units and anchors the translation scale.  ``keep_grids``
    stashes the two vote grids in the diagnostics (they are large).
    """
    if grid is None:
        grid = GridConfig.for_image(intrinsics.width, intrinsics.height)
    segments = segments_from_matches(matches, intrinsics, coefficients, min_length)
    theta_1, theta_2 = orientation_peaks(segments, bin_width, min_separation)
    log.info("orientation peaks at %.1f and %.1f degrees (%d segments)",
             theta_1, theta_2, len(segments))

    vps: list[tuple[float, float]] = []
    vp_diagnostics: list[dict] = []
    grids: list[VoteGrid] = []
    for peak in (theta_1, theta_2):
        cluster = cluster_segments(segments, peak, half_width)
        votes = vote_lines(cluster, grid)
        vp, diag = estimate_vanishing_point(votes, top_fraction, k_sigma)
        diag["peak"] = peak
        diag["cluster_size"] = len(cluster)
        vps.append(vp)
        vp_diagnostics.append(diag)
        if keep_grids:
            grids.append(votes)
    vp_x, vp_y = vps

    c = intrinsics.principal_point
    f_new = refine_focal_from_vps(vp_x, vp_y, c)
    R = orthonormalize_rotation(rotation_from_vps(vp_x, vp_y, f_new, c))
    t = translation_from_height(R, height)
    log.info("refined focal %.2f px, camera depth %.2f", f_new, t[2])
    diagnostics: dict = {"peaks": [theta_1, theta_2], "vps": vp_diagnostics}
    if keep_grids:
        diagnostics["grids"] = grids
    return ExtrinsicResult(
        f_new=f_new,
        pose=Pose(R, t),
        vp_x=vp_x,
        vp_y=vp_y,
        height=height,
        diagnostics=diagnostics,
    )
