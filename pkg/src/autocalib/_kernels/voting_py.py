"""Numpy fallback for the line-vote rasterizer.

Semantics (shared bit-for-bit with the compiled kernel): each segment is
extended to an infinite line; stepping one grid cell at a time along the
line's dominant axis, the cell under the line at each step center gains
one vote.  A cell covers ``[i, i+1)`` in grid units, so a line crossing
cell column ``c`` votes for row ``floor(y(c + 0.5))``.
"""

from __future__ import annotations

import numpy as np


def vote_segments(
    counts: np.ndarray,
    segments: np.ndarray,
    u0: float,
    v0: float,
    cell: float,
) -> None:
    """Accumulate one vote per (line, dominant-axis cell) into ``counts``.

    Args:
        counts: (rows, cols) int64 grid, modified in place.
        segments: (N, 4) float64 rows ``u1, v1, u2, v2`` in pixels.
        u0, v0: pixel coordinates of the grid's top-left corner.
        cell: cell edge length in pixels.
    """
    rows, cols = counts.shape
    col_centers = np.arange(cols, dtype=np.float64) + 0.5
    row_centers = np.arange(rows, dtype=np.float64) + 0.5
    for u1, v1, u2, v2 in segments:
        x1 = (u1 - u0) / cell
        y1 = (v1 - v0) / cell
        x2 = (u2 - u0) / cell
        y2 = (v2 - v0) / cell
        dx = x2 - x1
        dy = y2 - y1
        if dx == 0.0 and dy == 0.0:
            continue
        if abs(dx) >= abs(dy):
            slope = dy / dx
            y = y1 + (col_centers - x1) * slope
            r = np.floor(y)
            ok = (r >= 0) & (r < rows)
            np.add.at(counts, (r[ok].astype(np.intp), np.nonzero(ok)[0]), 1)
        else:
            slope = dx / dy
            x = x1 + (row_centers - y1) * slope
            c = np.floor(x)
            ok = (c >= 0) & (c < cols)
            np.add.at(counts, (np.nonzero(ok)[0], c[ok].astype(np.intp)), 1)
