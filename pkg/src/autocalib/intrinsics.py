"""Intrinsic calibration: focal length by trajectory straightening,
then radial polynomial coefficients.

The only unknown of the camera internals is the focal length.  Vehicles
travel straight in the world, so their imaged tracks are straight up to
fisheye bending; undistorting the tracks with a trial focal and scoring
the total line-fit residual yields an objective whose minimum sits at
the true value.  The search sweeps a pixel grid over
``[f_min, image diagonal]`` and then polishes the best cell with a
golden-section pass.

Distortion coefficients are fitted afterwards: in normalized
coordinates the distorted radius equals the view angle, so the target
correction is the closed-form curve ``tan(r)/r``.  Regressing
``s(r) - 1`` on ``[r^2, r^4, r^6]`` gives the polynomial without the
per-coordinate division that plagues the naive formulation near the
axes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BeyondHemisphere, DegenerateObjective, NoTracks, RankDeficient
from .geometry import DistortionCoefficients, Intrinsics, undistort_equidistant
from .tracks import Track, line_sse

log = logging.getLogger(__name__)

# ratio of the invphi golden section
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

BEYOND_HEMISPHERE_PENALTY = 10.0


@dataclass(frozen=True)
class FocalSearchConfig:
    """Grid-search range in pixels; ``f_max=None`` means the image diagonal."""

    f_min: float = 10.0
    f_max: float | None = None
    step: float = 1.0
    refine: bool = True

    def resolve_max(self, image_size: tuple[int, int]) -> float:
        f_max = self.f_max if self.f_max is not None else math.hypot(*image_size)
        if not (0 < self.f_min < f_max and self.step > 0):
            raise ValueError(f"invalid focal search range [{self.f_min}, {f_max}] step {self.step}")
        return f_max


@dataclass(frozen=True)
class TrackResidual:
    track_id: int
    before: float
    after: float


@dataclass(frozen=True)
class IntrinsicResult:
    intrinsics: Intrinsics
    coefficients: DistortionCoefficients
    objective_curve: list[tuple[float, float]]
    residual_report: list[TrackResidual]

    def to_json_dict(self) -> dict:
        return {
            "f": self.intrinsics.f,
            "K": self.intrinsics.matrix().tolist(),
            "dist": list(self.coefficients.as_array()),
            "curve": [[f, sse] for f, sse in self.objective_curve],
            "residuals": [
                {"track": r.track_id, "before": r.before, "after": r.after}
                for r in self.residual_report
            ],
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "IntrinsicResult":
        K = np.asarray(raw["K"], dtype=float)
        intr = Intrinsics(
            f=float(raw["f"]),
            width=int(round(2 * K[0, 2])),
            height=int(round(2 * K[1, 2])),
        )
        dist = [float(v) for v in raw.get("dist", [])]
        dist = (dist + [0.0, 0.0, 0.0])[:3]  # hand-written files may omit higher orders
        return cls(
            intrinsics=intr,
            coefficients=DistortionCoefficients(*dist),
            objective_curve=[(float(f), float(s)) for f, s in raw.get("curve", [])],
            residual_report=[
                TrackResidual(int(r["track"]), float(r["before"]), float(r["after"]))
                for r in raw.get("residuals", [])
            ],
        )


def _centered(track: Track, image_size: tuple[int, int]) -> np.ndarray:
    cx, cy = image_size[0] / 2.0, image_size[1] / 2.0
    return track.points - np.array([cx, cy])


def straightness_objective(
    tracks: Sequence[Track], f: float, image_size: tuple[int, int]
) -> float:
    """Total orthogonal line-fit residual after undistorting every track at ``f``.

    Tracks whose points reach past the tan() hemisphere at this focal
    contribute ten times their raw (pre-undistortion) residual instead,
    which keeps the objective finite while pricing the focal out.

    Raises:
        NoTracks: empty input.
    """
    if len(tracks) == 0:
        raise NoTracks("straightness objective needs at least one track")
    total = 0.0
    for track in tracks:
        centered = _centered(track, image_size)
        try:
            total += line_sse(undistort_equidistant(centered, f))
        except BeyondHemisphere:
            total += BEYOND_HEMISPHERE_PENALTY * line_sse(centered)
    return total


def estimate_focal(
    tracks: Sequence[Track],
    image_size: tuple[int, int],
    config: FocalSearchConfig = FocalSearchConfig(),
) -> tuple[float, list[tuple[float, float]]]:
    """Grid search for the focal length with optional golden-section polish.

    Returns ``(f_hat, curve)`` where the curve lists every grid
    evaluation ``(f, total_sse)`` in ascending ``f``.

    Raises:
        NoTracks: empty input.
        DegenerateObjective: the curve is flat (no curvature information,
            e.g. all tracks have two points).
    """
    if len(tracks) == 0:
        raise NoTracks("focal search needs at least one track")
    f_max = config.resolve_max(image_size)
    grid = np.arange(config.f_min, f_max + 0.5 * config.step, config.step)
    grid = grid[grid <= f_max]

    def objective(f: float) -> float:
        return straightness_objective(tracks, f, image_size)

    values = np.array([objective(f) for f in grid])
    curve = [(float(f), float(v)) for f, v in zip(grid, values)]
    if values.max() - values.min() < 1e-12:
        raise DegenerateObjective("straightness objective is flat over the search range")

    best = int(np.argmin(values))  # argmin takes the lowest f on ties
    f_hat = float(grid[best])
    if config.refine:
        lo = max(config.f_min, f_hat - config.step)
        hi = min(f_max, f_hat + config.step)
        f_hat = _golden_section(objective, lo, hi)
    log.info("focal search minimum at %.3f px over [%g, %g]", f_hat, config.f_min, f_max)
    return f_hat, curve


def _golden_section(objective, lo: float, hi: float, tol: float = 1e-3) -> float:
    """Standard golden-section minimization on a bracket."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = objective(d)
    return (a + b) / 2.0


def fit_distortion_coefficients(
    tracks: Sequence[Track],
    f_hat: float,
    intrinsics: Intrinsics,
) -> DistortionCoefficients:
    """Least-squares radial polynomial reproducing the equidistant correction.

    Track points are normalized with the estimated intrinsics; at each
    observed radius the wanted scale is ``s = tan(r)/r``, and
    ``[r^2, r^4, r^6] k = s - 1`` is solved over all points.  Radii are
    taken from the data, not a grid, so the fit is tightest where the
    keypoints actually live.

    Raises:
        NoTracks: empty input.
        RankDeficient: fewer than 3 usable radii, or the design matrix
            condition exceeds 1e12 (radius range too narrow).
    """
    if len(tracks) == 0:
        raise NoTracks("distortion fit needs track points")
    if f_hat <= 0:
        raise ValueError("f_hat must be positive")
    pts = np.vstack([_centered(t, (intrinsics.width, intrinsics.height)) for t in tracks])
    r = np.hypot(pts[:, 0], pts[:, 1]) / f_hat
    r = r[r > 1e-3]
    if r.size < 3:
        raise RankDeficient("need >= 3 points with non-negligible radius")
    r2 = r**2
    design = np.stack([r2, r2**2, r2**3], axis=1)
    if np.linalg.cond(design) > 1e12:
        raise RankDeficient("distortion design matrix condition > 1e12")
    target = np.tan(r) / r - 1.0
    k, *_ = np.linalg.lstsq(design, target, rcond=None)
    return DistortionCoefficients(*map(float, k))


def build_intrinsics(f_hat: float, image_size: tuple[int, int]) -> Intrinsics:
    """Intrinsics with equal focals, zero skew, principal point at the center."""
    return Intrinsics(f=f_hat, width=image_size[0], height=image_size[1])


def calibrate_intrinsics(
    tracks: Sequence[Track],
    meta,
    coverage_min: float = 0.8,
    tortuosity_max: float = 1.2,
    top_n: int = 10,
    search: FocalSearchConfig = FocalSearchConfig(),
) -> IntrinsicResult:
    """Full intrinsic stage: filter, select, search, fit, report.

    Raises:
        NoTracks: nothing survives filtering.
    """
    from .tracks import filter_tracks, select_calibration_tracks

    usable = filter_tracks(tracks, meta, coverage_min, tortuosity_max)
    selected = select_calibration_tracks(usable, top_n)
    if not selected:
        raise NoTracks(
            f"no calibration tracks left after filtering ({len(tracks)} in)"
        )
    log.info("selected %d/%d tracks for the focal search", len(selected), len(tracks))
    image_size = (meta.width, meta.height)
    f_hat, curve = estimate_focal(selected, image_size, search)
    intr = build_intrinsics(f_hat, image_size)
    coeffs = fit_distortion_coefficients(selected, f_hat, intr)
    report = []
    for track in selected:
        centered = _centered(track, image_size)
        before = line_sse(centered)
        try:
            after = line_sse(undistort_equidistant(centered, f_hat))
        except BeyondHemisphere:
            after = float("inf")
        report.append(TrackResidual(track.id, before, after))
    return IntrinsicResult(
        intrinsics=intr,
        coefficients=coeffs,
        objective_curve=curve,
        residual_report=report,
    )
