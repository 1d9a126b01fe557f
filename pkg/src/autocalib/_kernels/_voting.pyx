# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled line-vote rasterizer; see voting_py.py for the reference
semantics (the two must match exactly, cell for cell)."""

from libc.math cimport fabs

import numpy as np


def vote_segments(long long[:, ::1] counts, double[:, ::1] segments,
                  double u0, double v0, double cell):
    """Accumulate one vote per (line, dominant-axis cell) into ``counts``."""
    cdef Py_ssize_t rows = counts.shape[0]
    cdef Py_ssize_t cols = counts.shape[1]
    cdef Py_ssize_t n = segments.shape[0]
    cdef Py_ssize_t i, col, row
    cdef double x1, y1, x2, y2, dx, dy, slope, y, x

    for i in range(n):
        x1 = (segments[i, 0] - u0) / cell
        y1 = (segments[i, 1] - v0) / cell
        x2 = (segments[i, 2] - u0) / cell
        y2 = (segments[i, 3] - v0) / cell
        dx = x2 - x1
        dy = y2 - y1
        if dx == 0.0 and dy == 0.0:
            continue
        if fabs(dx) >= fabs(dy):
            slope = dy / dx
            for col in range(cols):
                y = y1 + ((<double>col + 0.5) - x1) * slope
                # range check on the double: casting out-of-range values is UB
                if 0.0 <= y < <double>rows:
                    counts[<Py_ssize_t>y, col] += 1
        else:
            slope = dx / dy
            for row in range(rows):
                x = x1 + ((<double>row + 0.5) - y1) * slope
                if 0.0 <= x < <double>cols:
                    counts[row, <Py_ssize_t>x] += 1
