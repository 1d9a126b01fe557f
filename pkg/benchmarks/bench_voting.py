#!/usr/bin/env python3
"""Compare the compiled vote kernel with the numpy fallback.

The workload mirrors the extrinsic stage: matched keypoint segments
from a synthetic scene, one orientation cluster, every segment extended
to a full line across a grid three times the image extent.  Reported
numbers are best-of-N wall times on identical inputs, plus a checksum
equality line that double-checks the two kernels agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from autocalib._kernels import BACKEND, voting_py

try:
    from autocalib._kernels import _voting as compiled
except ImportError:
    compiled = None

from autocalib.extrinsics import (
    GridConfig,
    cluster_segments,
    orientation_peaks,
    segments_from_matches,
)
from autocalib.geometry import DistortionCoefficients
from autocalib.intrinsics import build_intrinsics
from autocalib.simulate import SceneSpec, generate_scene


def build_workload(vehicles: int) -> tuple[np.ndarray, GridConfig]:
    spec = SceneSpec(seed=3, vehicles_per_direction=vehicles)
    _, matches_doc, _ = generate_scene(spec)
    intrinsics = build_intrinsics(spec.f, (spec.width, spec.height))
    segments = segments_from_matches(
        np.asarray(matches_doc["matches"], dtype=float),
        intrinsics,
        DistortionCoefficients(),
    )
    theta, _ = orientation_peaks(segments)
    cluster = cluster_segments(segments, theta)
    endpoints = np.array([[s.p1[0], s.p1[1], s.p2[0], s.p2[1]] for s in cluster])
    return endpoints, GridConfig.for_image(spec.width, spec.height)


def best_of(kernel, endpoints: np.ndarray, config: GridConfig, repeats: int) -> tuple[float, int]:
    best = float("inf")
    checksum = 0
    for _ in range(repeats):
        counts = np.zeros((config.rows, config.cols), dtype=np.int64)
        start = time.perf_counter()
        kernel(counts, endpoints, config.u0, config.v0, config.cell)
        best = min(best, time.perf_counter() - start)
        checksum = int(counts.sum())
    return best, checksum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--vehicles", type=int, default=12, help="vehicles per direction")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best wins")
    args = parser.parse_args()

    endpoints, config = build_workload(args.vehicles)
    print(f"active backend: {BACKEND}")
    print(
        f"{len(endpoints)} lines over a {config.rows} x {config.cols} grid "
        f"({config.rows * config.cols / 1e6:.1f} Mcells)"
    )

    py_time, py_sum = best_of(voting_py.vote_segments, endpoints, config, args.repeats)
    print(f"python   {py_time * 1e3:9.2f} ms  ({len(endpoints) / py_time:11,.0f} lines/s)")
    if compiled is None:
        print("compiled kernel not built; `pip install -e . --no-build-isolation` builds it")
        return
    c_time, c_sum = best_of(compiled.vote_segments, endpoints, config, args.repeats)
    print(f"compiled {c_time * 1e3:9.2f} ms  ({len(endpoints) / c_time:11,.0f} lines/s)")
    agreement = "identical" if py_sum == c_sum else "DIFFERENT"
    print(f"speedup  {py_time / c_time:8.1f} x  (vote checksums {agreement}: {py_sum})")


if __name__ == "__main__":
    main()
