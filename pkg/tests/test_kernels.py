"""Vote-rasterizer backends: bit-identical counts and exact vote conservation.

The kernel contract: a segment's infinite line deposits exactly one vote
per dominant-axis cell it crosses inside the grid, at floor of the minor
coordinate evaluated at the cell's center.  Conservation is checked
against an independent scalar-math reimplementation: candidate cells are
bounded by solving 0 <= minor(c + 0.5) < minor_max for c, then each
candidate is verified with plain math.floor — no numpy, no shared code
with either backend.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from autocalib._kernels import BACKEND, vote_segments, voting_py

try:
    from autocalib._kernels import _voting as compiled
except ImportError:
    compiled = None


def _random_segments(rng: np.random.Generator, n: int) -> np.ndarray:
    p1 = rng.uniform(-50.0, 350.0, size=(n, 2))
    angle = rng.uniform(0.0, math.pi, size=n)
    length = rng.uniform(0.5, 120.0, size=n)
    p2 = p1 + np.stack([length * np.cos(angle), length * np.sin(angle)], axis=1)
    return np.hstack([p1, p2])


def _expected_line_votes(seg, rows, cols, u0, v0, cell) -> int:
    """In-grid dominant-axis crossing count, recomputed with scalar math."""
    x1, y1 = (seg[0] - u0) / cell, (seg[1] - v0) / cell
    x2, y2 = (seg[2] - u0) / cell, (seg[3] - v0) / cell
    dx, dy = x2 - x1, y2 - y1
    if dx == 0.0 and dy == 0.0:
        return 0
    if abs(dx) >= abs(dy):
        major_start, minor_start, slope, n_major, minor_max = x1, y1, dy / dx, cols, rows
    else:
        major_start, minor_start, slope, n_major, minor_max = y1, x1, dx / dy, rows, cols
    count = 0
    if slope == 0.0:
        return n_major if 0.0 <= math.floor(minor_start) < minor_max else 0
    # minor(t) = minor_start + (t - major_start) * slope must land in [0, minor_max)
    t_a = major_start + (0.0 - minor_start) / slope
    t_b = major_start + (minor_max - minor_start) / slope
    lo, hi = min(t_a, t_b), max(t_a, t_b)
    # integer c with lo <= c + 0.5 and c + 0.5 strictly below hi on the open end
    for c in range(max(0, math.floor(lo - 1.0)), min(n_major, math.ceil(hi + 1.0))):
        minor = minor_start + (c + 0.5 - major_start) * slope
        if 0.0 <= math.floor(minor) < minor_max:
            count += 1
    return count


def test_backend_is_reported():
    assert BACKEND in ("compiled", "python")
    if BACKEND == "compiled":
        assert compiled is not None and vote_segments is compiled.vote_segments
    else:
        assert vote_segments is voting_py.vote_segments


def test_backends_agree_exactly():
    if compiled is None:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(42)
    segments = _random_segments(rng, 400)
    a = np.zeros((180, 260), dtype=np.int64)
    b = np.zeros((180, 260), dtype=np.int64)
    compiled.vote_segments(a, segments, -20.0, -30.0, 1.5)
    voting_py.vote_segments(b, segments, -20.0, -30.0, 1.5)
    np.testing.assert_array_equal(a, b)


def test_vote_conservation_against_closed_form():
    rng = np.random.default_rng(7)
    segments = _random_segments(rng, 200)
    rows, cols, u0, v0, cell = 150, 220, -10.0, -40.0, 2.0
    counts = np.zeros((rows, cols), dtype=np.int64)
    vote_segments(counts, segments, u0, v0, cell)
    expected = sum(
        _expected_line_votes(seg, rows, cols, u0, v0, cell) for seg in segments
    )
    assert counts.sum() == expected


def test_full_horizontal_line_votes_every_column():
    counts = np.zeros((50, 80), dtype=np.int64)
    vote_segments(counts, np.array([[5.0, 20.3, 9.0, 20.3]]), 0.0, 0.0, 1.0)
    assert counts.sum() == 80
    assert np.array_equal(np.nonzero(counts.sum(axis=1))[0], [20])
    np.testing.assert_array_equal(counts[20], np.ones(80, dtype=np.int64))


def test_diagonal_line_one_vote_per_column():
    counts = np.zeros((100, 100), dtype=np.int64)
    # 45 degrees: x-major by the >= tie rule, one vote per column
    vote_segments(counts, np.array([[0.0, 0.25, 10.0, 10.25]]), 0.0, 0.0, 1.0)
    assert counts.sum() == 100
    assert counts.max() == 1


def test_zero_length_segment_is_skipped():
    counts = np.zeros((10, 10), dtype=np.int64)
    vote_segments(counts, np.array([[3.0, 3.0, 3.0, 3.0]]), 0.0, 0.0, 1.0)
    assert counts.sum() == 0


def test_line_outside_grid_contributes_nothing():
    counts = np.zeros((10, 10), dtype=np.int64)
    vote_segments(counts, np.array([[0.0, 50.0, 9.0, 50.0]]), 0.0, 0.0, 1.0)
    assert counts.sum() == 0


def test_offset_and_cell_scaling():
    # same geometry expressed in a shifted, coarser grid lands in the same cells
    counts_a = np.zeros((20, 20), dtype=np.int64)
    vote_segments(counts_a, np.array([[0.0, 10.2, 19.0, 10.2]]), 0.0, 0.0, 1.0)
    counts_b = np.zeros((20, 20), dtype=np.int64)
    vote_segments(
        counts_b, np.array([[100.0, 120.4, 138.0, 120.4]]), 100.0, 100.0, 2.0
    )
    assert np.array_equal(np.nonzero(counts_a.sum(axis=1))[0], [10])
    assert np.array_equal(np.nonzero(counts_b.sum(axis=1))[0], [10])
