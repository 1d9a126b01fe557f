"""Trajectory files, the two filtering rules, track selection, and
orthogonal least-squares line fitting.

Tracks come in as ``autocalib-tracks/1`` JSON::

    {"schema": "autocalib-tracks/1",
     "video": {"width": int, "height": int, "frame_count": int, "fps": number},
     "tracks": [{"id": int, "points": [[frame, u, v], ...]}, ...]}

Filtering keeps a track only when it spans at least 80 % of the clip
and its pixel path length stays within 1.2x of its endpoint
displacement; both thresholds are parameters with those defaults.
Line fits minimize *perpendicular* distances so near-vertical image
trajectories are as well-conditioned as horizontal ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import jsonio
from .errors import DegeneratePoints, ParseError, SchemaVersionMismatch

TRACKS_SCHEMA = "autocalib-tracks/1"


@dataclass(frozen=True)
class VideoMeta:
    width: int
    height: int
    frame_count: int
    fps: float

    def __post_init__(self) -> None:
        if min(self.width, self.height, self.frame_count) <= 0 or self.fps <= 0:
            raise ValueError("video metadata fields must all be positive")


@dataclass(frozen=True)
class Track:
    """One keypoint's pixel positions over strictly increasing frame indices."""

    id: int
    frames: np.ndarray
    points: np.ndarray

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.int64)
        points = np.asarray(self.points, dtype=float)
        if frames.ndim != 1 or points.shape != (frames.size, 2):
            raise ValueError("frames must be (N,), points (N, 2)")
        if frames.size < 2:
            raise ValueError("a track needs at least 2 samples")
        if np.any(np.diff(frames) <= 0):
            raise ValueError("frame indices must be strictly increasing")
        if not np.all(np.isfinite(points)):
            raise ValueError("track points must be finite")
        frames.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "points", points)

    @property
    def span(self) -> int:
        return int(self.frames[-1] - self.frames[0])

    @property
    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    @property
    def displacement(self) -> float:
        return float(np.linalg.norm(self.points[-1] - self.points[0]))


@dataclass(frozen=True)
class LineFit:
    """Line ``n . p = d`` with unit normal, plus the residual it achieved."""

    normal: np.ndarray
    offset: float
    sse: float


def load_tracks(path: str | Path) -> tuple[VideoMeta, list[Track]]:
    """Read and validate a trajectory file.

    Raises:
        SchemaVersionMismatch: unknown "schema" value.
        ParseError: structural problems, with track/field context.
    """
    try:
        raw = jsonio.load(path)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be an object")
    schema = raw.get("schema")
    if schema != TRACKS_SCHEMA:
        raise SchemaVersionMismatch(f"{path}: schema {schema!r}, expected {TRACKS_SCHEMA!r}")

    video = raw.get("video")
    if not isinstance(video, dict):
        raise ParseError(f"{path}: missing 'video' object")
    try:
        meta = VideoMeta(
            width=int(video["width"]),
            height=int(video["height"]),
            frame_count=int(video["frame_count"]),
            fps=float(video["fps"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad video metadata: {exc}") from exc

    entries = raw.get("tracks")
    if not isinstance(entries, list):
        raise ParseError(f"{path}: missing 'tracks' array")
    tracks = []
    for idx, entry in enumerate(entries):
        where = f"{path}: tracks[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: not an object")
        try:
            track_id = int(entry["id"])
            rows = entry["points"]
            frames = np.array([row[0] for row in rows], dtype=np.int64)
            points = np.array([[row[1], row[2]] for row in rows], dtype=float)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"{where}: bad points: {exc}") from exc
        try:
            tracks.append(Track(id=track_id, frames=frames, points=points))
        except ValueError as exc:
            raise ParseError(f"{where} (id {track_id}): {exc}") from exc
    return meta, tracks


def filter_tracks(
    tracks: Sequence[Track],
    meta: VideoMeta,
    coverage_min: float = 0.8,
    tortuosity_max: float = 1.2,
) -> list[Track]:
    """Keep tracks spanning >= ``coverage_min`` of the clip whose path length
    is <= ``tortuosity_max`` times their displacement, preserving order.

    Coverage uses the frame-index span so tracking gaps are not
    penalized.  Stationary tracks (displacement < 1e-6 px) fail the
    tortuosity rule by convention rather than raising.
    """
    kept = []
    for track in tracks:
        if track.span / meta.frame_count < coverage_min:
            continue
        displacement = track.displacement
        if displacement < 1e-6:
            continue
        if track.path_length / displacement > tortuosity_max:
            continue
        kept.append(track)
    return kept


def select_calibration_tracks(tracks: Sequence[Track], n: int = 10) -> list[Track]:
    """The ``n`` longest tracks by pixel path length, ties broken by lower id."""
    ranked = sorted(tracks, key=lambda t: (-t.path_length, t.id))
    return ranked[:n]


def fit_line(points: np.ndarray) -> LineFit:
    """Orthogonal (total) least-squares line through a point set.

    The fitted line minimizes the sum of squared perpendicular
    distances; the minimum is the smallest eigenvalue of the centered
    scatter matrix.  Invariant to permutation and rigid motion of the
    points, and happy with vertical lines.

    Raises:
        DegeneratePoints: fewer than 2 distinct points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegeneratePoints(f"need >= 2 points of shape (N, 2), got {pts.shape}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    scatter = centered.T @ centered
    if np.allclose(scatter, 0.0, atol=1e-300):
        raise DegeneratePoints("all points coincide")
    eigvals, eigvecs = np.linalg.eigh(scatter)
    normal = eigvecs[:, 0]  # eigh sorts ascending; smallest spread is the normal
    sse = float(max(eigvals[0], 0.0))
    return LineFit(normal=normal, offset=float(normal @ centroid), sse=sse)


def line_sse(points: np.ndarray) -> float:
    """Residual of the best orthogonal line; 0.0 for a 2-point set."""
    return fit_line(points).sse
