"""Extrinsic stage: orientation statistics, accumulator voting, pose recovery.

Frozen oracles used below:

* Focal from vanishing points: with the principal point at the origin,
  vp_x = (900, 0) and vp_y = (-1000, 0) give
  f = sqrt(-(900 * -1000)) = sqrt(9e5) = 948.6832980505138.
* Rotation columns: c = (0,0), f_new = 1, vp_x = (1,0), vp_y = (-1,0)
  normalize to (1,0,1)/sqrt(2) and (-1,0,1)/sqrt(2); their cross product
  is (0,-1,0).
* Two-cell vote cloud: equal counts at cell centers (10.5, 10.5) and
  (20.5, 10.5) have mean (15.5, 10.5), per-axis std (5, 0), principal
  axis (1, 0), and sigma 5 along it.
* The orthogonality identity: vanishing points induced by a rotation R
  at focal f satisfy (vp_x - c).(vp_y - c) = -f^2 exactly, because the
  first two columns of R are orthonormal.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from autocalib import jsonio
from autocalib.errors import (
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
from autocalib.extrinsics import (
    SEGMENTS_SCHEMA,
    ExtrinsicResult,
    GridConfig,
    LineSegment,
    VoteGrid,
    cluster_segments,
    estimate_vanishing_point,
    load_matches,
    orientation_histogram,
    orientation_peaks,
    orthonormalize_rotation,
    refine_focal_from_vps,
    rotation_from_vps,
    segments_from_matches,
    translation_from_height,
    vote_lines,
)
from autocalib.geometry import DistortionCoefficients, Intrinsics, Pose

from conftest import random_rotation


def _segment_at(angle_deg: float, length: float = 10.0, origin=(0.0, 0.0)) -> LineSegment:
    theta = math.radians(angle_deg)
    return LineSegment(
        p1=origin,
        p2=(origin[0] + length * math.cos(theta), origin[1] + length * math.sin(theta)),
    )


# --- segments -----------------------------------------------------------------------

def test_segment_orientation_is_undirected():
    forward = LineSegment((0.0, 0.0), (1.0, 1.0))
    backward = LineSegment((1.0, 1.0), (0.0, 0.0))
    assert forward.orientation == pytest.approx(45.0)
    assert backward.orientation == pytest.approx(45.0)
    assert forward.magnitude == pytest.approx(math.sqrt(2.0))


def test_segment_distance_horizontal_line():
    seg = LineSegment((2.0, 3.0), (7.0, 3.0))
    assert seg.distance == pytest.approx(3.0)


def test_segment_degenerate():
    with pytest.raises(ValueError):
        LineSegment((1.0, 1.0), (1.0, 1.0))


def test_segments_from_matches_undistorts_and_filters():
    intr = Intrinsics(f=100.0, width=200, height=200)
    k = DistortionCoefficients(k1=0.1)
    matches = np.array(
        [
            [0.0, 6.0, 150.0, 100.0, 100.0, 150.0],  # long enough
            [0.0, 6.0, 100.0, 100.0, 100.5, 100.0],  # 0.5 px, dropped
        ]
    )
    segments = segments_from_matches(matches, intr, k, min_length=2.0)
    assert len(segments) == 1
    # (150,100) normalizes to (0.5, 0), r^2 = 0.25, factor 1.025 -> (151.25, 100)
    assert segments[0].p1[0] == pytest.approx(151.25)
    assert segments[0].p1[1] == pytest.approx(100.0)
    assert segments_from_matches(np.empty((0, 6)), intr, k) == []


# --- orientation histogram ------------------------------------------------------------

def test_histogram_weighted_by_magnitude():
    segments = [_segment_at(10.4, length=2.0), _segment_at(170.2, length=1.0)]
    hist = orientation_histogram(segments, bin_width=1.0)
    assert hist.counts[10] == pytest.approx(2.0)
    assert hist.counts[170] == pytest.approx(1.0)
    assert hist.counts.sum() == pytest.approx(3.0)
    assert hist.bin_centers[10] == pytest.approx(10.5)


def test_histogram_bin_width_must_divide_180():
    with pytest.raises(ValueError):
        orientation_histogram([_segment_at(10.0)], bin_width=7.0)


def test_peaks_sharpened_to_in_bin_mean():
    segments = [
        _segment_at(40.2, length=3.0),
        _segment_at(40.4, length=1.0),
        _segment_at(100.3, length=2.0),
    ]
    theta_1, theta_2 = orientation_peaks(segments)
    assert theta_1 == pytest.approx((3.0 * 40.2 + 1.0 * 40.4) / 4.0, abs=1e-9)
    assert theta_2 == pytest.approx(100.3, abs=1e-9)


def test_peaks_strongest_first():
    segments = [_segment_at(100.5, length=5.0), _segment_at(10.5, length=2.0),
                _segment_at(10.6, length=2.0)]
    theta_1, theta_2 = orientation_peaks(segments)
    assert theta_1 == pytest.approx(100.5, abs=0.01)
    assert 10.4 < theta_2 < 10.7


def test_peaks_survive_wraparound():
    # 170 and 30 are 40 degrees apart circularly (through 180), a valid pair
    segments = [_segment_at(170.5, length=3.0), _segment_at(30.5, length=2.0)]
    theta_1, theta_2 = orientation_peaks(segments)
    assert theta_1 == pytest.approx(170.5, abs=0.01)
    assert theta_2 == pytest.approx(30.5, abs=0.01)


def test_peaks_unimodal_when_lobes_too_close():
    # 2 and 178 are only 4 degrees apart circularly: same traffic direction
    segments = [_segment_at(2.3, length=3.0), _segment_at(178.2, length=2.0)]
    with pytest.raises(Unimodal):
        orientation_peaks(segments)


def test_peaks_unimodal_when_second_weak():
    segments = [_segment_at(40.5, length=10.0), _segment_at(100.5, length=1.0)]
    with pytest.raises(Unimodal):
        orientation_peaks(segments)


def test_peaks_need_two_segments():
    with pytest.raises(Unimodal):
        orientation_peaks([_segment_at(40.0)])


def test_cluster_window_is_inclusive_and_circular():
    # orientation 0 is exact in floating point, so distance-to-peak 5.0
    # probes the inclusive boundary without rounding surprises
    horizontal = LineSegment((0.0, 0.0), (10.0, 0.0))
    steep = _segment_at(12.0)
    assert cluster_segments([horizontal, steep], peak=5.0, half_width=5.0) == [horizontal]
    # circular: 0 is 5 degrees from 175 across the wrap
    assert cluster_segments([horizontal, steep], peak=175.0, half_width=5.0) == [horizontal]
    with pytest.raises(EmptyCluster):
        cluster_segments([horizontal, steep], peak=90.0, half_width=5.0)


# --- voting -----------------------------------------------------------------------------

def test_grid_config_for_image():
    cfg = GridConfig.for_image(1280, 720, scale=3.0)
    assert (cfg.u0, cfg.v0) == (-1280.0, -720.0)
    assert (cfg.cols, cfg.rows) == (3840, 2160)
    with pytest.raises(ValueError):
        GridConfig(u0=0.0, v0=0.0, cols=0, rows=10)


def test_vote_lines_converge_on_common_point():
    target = (130.0, 80.0)
    segments = []
    for angle in np.linspace(35.0, 55.0, 9):
        theta = math.radians(angle)
        d = (math.cos(theta), math.sin(theta))
        # place the segment well away from the target on its line
        segments.append(LineSegment(
            p1=(target[0] - 60.0 * d[0], target[1] - 60.0 * d[1]),
            p2=(target[0] - 40.0 * d[0], target[1] - 40.0 * d[1]),
        ))
    grid = vote_lines(segments, GridConfig(u0=0.0, v0=0.0, cols=200, rows=160))
    assert grid.counts.sum() > 0
    vp, diag = estimate_vanishing_point(grid, k_sigma=0.0)
    assert abs(vp[0] - target[0]) <= 1.5
    assert abs(vp[1] - target[1]) <= 1.5
    assert diag["max_count"] == len(segments)


def test_vanishing_point_two_cell_statistics():
    cfg = GridConfig(u0=0.0, v0=0.0, cols=40, rows=20)
    counts = np.zeros((20, 40), dtype=np.int64)
    counts[10, 10] = 100
    counts[10, 20] = 100
    grid = VoteGrid(config=cfg, counts=counts)
    vp, diag = estimate_vanishing_point(grid, top_fraction=0.2, k_sigma=0.0)
    assert vp == pytest.approx((15.5, 10.5))
    assert diag["std"] == pytest.approx([5.0, 0.0])
    assert diag["sigma_axis"] == pytest.approx(5.0)
    assert diag["cells"] == 2
    # the k_sigma push moves along the (canonical) +u principal axis
    vp2, _ = estimate_vanishing_point(grid, top_fraction=0.2, k_sigma=2.0)
    assert vp2 == pytest.approx((25.5, 10.5))


def test_vanishing_point_push_toward_brightest():
    cfg = GridConfig(u0=0.0, v0=0.0, cols=40, rows=20)
    counts = np.zeros((20, 40), dtype=np.int64)
    counts[10, 10] = 100
    counts[10, 20] = 90  # inside the 20% cloud, outside the brightest 1%
    grid = VoteGrid(config=cfg, counts=counts)
    vp, _ = estimate_vanishing_point(grid, top_fraction=0.2, k_sigma=1.0)
    # mean sits at the weighted center, the push walks toward the 100-count cell
    assert vp[0] < 15.5
    assert vp[1] == pytest.approx(10.5)


def test_vanishing_point_validation_and_empty():
    cfg = GridConfig(u0=0.0, v0=0.0, cols=4, rows=4)
    grid = VoteGrid(config=cfg, counts=np.zeros((4, 4), dtype=np.int64))
    with pytest.raises(EmptyGrid):
        estimate_vanishing_point(grid)
    filled = VoteGrid(config=cfg, counts=np.ones((4, 4), dtype=np.int64))
    with pytest.raises(ValueError):
        estimate_vanishing_point(filled, top_fraction=0.0)
    with pytest.raises(ValueError):
        estimate_vanishing_point(filled, k_sigma=4.0)


# --- pose recovery ------------------------------------------------------------------------

def test_refine_focal_frozen_oracle():
    f = refine_focal_from_vps((900.0, 0.0), (-1000.0, 0.0), (0.0, 0.0))
    assert f == pytest.approx(948.6832980505138, abs=1e-9)


def test_refine_focal_inconsistent():
    with pytest.raises(InconsistentVPs):
        refine_focal_from_vps((900.0, 0.0), (1000.0, 0.0), (0.0, 0.0))


def test_refine_focal_orthogonality_identity():
    rng = np.random.default_rng(17)
    f = 800.0
    c = (640.0, 360.0)
    checked = 0
    while checked < 100:
        R = random_rotation(rng)
        if min(abs(R[2, 0]), abs(R[2, 1])) < 1e-3:
            continue  # a vanishing point at infinity is a different regime
        vps = [
            (c[0] + f * R[0, i] / R[2, i], c[1] + f * R[1, i] / R[2, i])
            for i in (0, 1)
        ]
        radicand = -(
            (vps[0][0] - c[0]) * (vps[1][0] - c[0])
            + (vps[0][1] - c[1]) * (vps[1][1] - c[1])
        )
        assert abs(radicand - f * f) <= 1e-6 * f * f
        assert refine_focal_from_vps(vps[0], vps[1], c) == pytest.approx(f, rel=1e-6)
        checked += 1


def test_rotation_from_vps_frozen_columns():
    R = rotation_from_vps((1.0, 0.0), (-1.0, 0.0), f_new=1.0, principal_point=(0.0, 0.0))
    s = 1.0 / math.sqrt(2.0)
    np.testing.assert_allclose(R[:, 0], [s, 0.0, s], atol=1e-12)
    np.testing.assert_allclose(R[:, 1], [-s, 0.0, s], atol=1e-12)
    np.testing.assert_allclose(R[:, 2], [0.0, -1.0, 0.0], atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_rotation_from_vps_round_trips_random_rotations():
    rng = np.random.default_rng(23)
    f = 500.0
    c = (320.0, 240.0)
    done = 0
    while done < 25:
        R_true = random_rotation(rng)
        if min(abs(R_true[2, 0]), abs(R_true[2, 1])) < 0.1:
            continue
        if R_true[2, 0] < 0:  # vanishing directions must look forward
            R_true[:, 0] = -R_true[:, 0]
        if R_true[2, 1] < 0:
            R_true[:, 1] = -R_true[:, 1]
        R_true[:, 2] = np.cross(R_true[:, 0], R_true[:, 1])
        vps = [
            (c[0] + f * R_true[0, i] / R_true[2, i], c[1] + f * R_true[1, i] / R_true[2, i])
            for i in (0, 1)
        ]
        R = orthonormalize_rotation(rotation_from_vps(vps[0], vps[1], f, c))
        np.testing.assert_allclose(R, R_true, atol=1e-9)
        done += 1


def test_rotation_from_vps_parallel():
    with pytest.raises(ParallelVPs):
        rotation_from_vps((1.0, 0.0), (0.9, 0.0), f_new=1.0, principal_point=(0.0, 0.0))
    with pytest.raises(ValueError):
        rotation_from_vps((1.0, 0.0), (-1.0, 0.0), f_new=0.0, principal_point=(0.0, 0.0))


def test_orthonormalize_rotation():
    rng = np.random.default_rng(31)
    R_true = random_rotation(rng)
    noisy = R_true + 0.05 * rng.normal(size=(3, 3))
    R = orthonormalize_rotation(noisy)
    assert np.max(np.abs(R @ R.T - np.eye(3))) <= 1e-9
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)
    # already a rotation: unchanged
    np.testing.assert_allclose(orthonormalize_rotation(R_true), R_true, atol=1e-12)
    with pytest.raises(SingularInput):
        orthonormalize_rotation(np.zeros((3, 3)))
    with pytest.raises(SingularInput):
        orthonormalize_rotation(np.full((3, 3), np.nan))


def test_translation_from_height():
    t = translation_from_height(np.diag([1.0, -1.0, -1.0]), height=9.0)
    np.testing.assert_allclose(t, [0.0, 0.0, 9.0])
    # optical axis in the ground plane: r33 = 0
    R_horizontal = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    with pytest.raises(HorizontalCamera):
        translation_from_height(R_horizontal, height=9.0)


# --- match files and results -----------------------------------------------------------------

def _match_doc() -> dict:
    return {
        "schema": SEGMENTS_SCHEMA,
        "stride": 6,
        "matches": [[0, 6, 10.0, 20.0, 30.0, 40.0], [3, 9, 50.0, 60.0, 70.0, 80.0]],
    }


def test_load_matches_round_trip(tmp_path):
    path = tmp_path / "matches.json"
    jsonio.dump(_match_doc(), path)
    stride, matches = load_matches(path)
    assert stride == 6
    assert matches.shape == (2, 6)
    np.testing.assert_allclose(matches[0], [0, 6, 10.0, 20.0, 30.0, 40.0])


def test_load_matches_empty_ok(tmp_path):
    doc = _match_doc()
    doc["matches"] = []
    path = tmp_path / "matches.json"
    jsonio.dump(doc, path)
    stride, matches = load_matches(path)
    assert matches.shape == (0, 6)


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda d: d.__setitem__("schema", "other/1"), SchemaVersionMismatch),
        (lambda d: d.pop("stride"), ParseError),
        (lambda d: d.__setitem__("stride", 0), ParseError),
        (lambda d: d["matches"].append([0, 5, 1.0, 2.0, 3.0, 4.0]), ParseError),  # gap 5 != 6
        (lambda d: d["matches"].append([0, 6, 1.0]), ParseError),  # short row
    ],
)
def test_load_matches_errors(tmp_path, mutate, error):
    doc = _match_doc()
    mutate(doc)
    path = tmp_path / "matches.json"
    jsonio.dump(doc, path)
    with pytest.raises(error):
        load_matches(path)


def test_extrinsic_result_round_trip():
    pose = Pose(R=np.diag([1.0, -1.0, -1.0]), t=np.array([0.0, 0.0, 9.0]))
    result = ExtrinsicResult(
        f_new=812.5,
        pose=pose,
        vp_x=(1500.0, -200.0),
        vp_y=(-400.0, -210.0),
        height=9.0,
    )
    back = ExtrinsicResult.from_json_dict(result.to_json_dict())
    assert back.f_new == result.f_new
    assert back.vp_x == result.vp_x and back.vp_y == result.vp_y
    np.testing.assert_allclose(back.pose.R, pose.R)
    np.testing.assert_allclose(back.pose.t, pose.t)
