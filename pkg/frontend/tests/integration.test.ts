/**
 * End-to-end check against the calibration pipeline: a rendered two-dot
 * video (perpendicular straight-line motion) is tracked, the emitted
 * documents are loaded by the Python package's own readers, and the
 * orientation histogram of the matched segments must show two peaks about
 * 90 degrees apart. Requires python3 with the calibration package
 * installed (editable install from the repository root).
 */

import { execFileSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SegmentsDocument, TracksDocument } from "../src/schema";
import { extractMatchedSegments, extractTracks } from "../src/tracker";
import { Video } from "../src/y4m";
import {
  angleSeparation,
  lineAngle,
  PERPENDICULAR_SCENE,
  perpendicularSceneFrames,
} from "./fixtures";

const PY_CHECK = `
import json, sys
from autocalib.extrinsics import load_matches, orientation_peaks, segments_from_matches
from autocalib.geometry import DistortionCoefficients, Intrinsics
from autocalib.tracks import load_tracks

tracks_path, matches_path = sys.argv[1], sys.argv[2]
meta, tracks = load_tracks(tracks_path)
stride, matches = load_matches(matches_path)
intr = Intrinsics(f=300.0, width=meta.width, height=meta.height)
segments = segments_from_matches(matches, intr, DistortionCoefficients())
theta_1, theta_2 = orientation_peaks(segments)
print(json.dumps({
    "n_tracks": len(tracks),
    "frame_count": meta.frame_count,
    "stride": stride,
    "n_matches": int(matches.shape[0]),
    "n_segments": len(segments),
    "peaks": [theta_1, theta_2],
}))
`;

let dir: string;
let video: Video;
let tracksDoc: TracksDocument;
let segmentsDoc: SegmentsDocument;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "integration-"));
  const s = PERPENDICULAR_SCENE;
  video = {
    width: s.width,
    height: s.height,
    fps: s.fps,
    frames: perpendicularSceneFrames(),
  };
  tracksDoc = extractTracks(video);
  segmentsDoc = extractMatchedSegments(video, { stride: 6 });
}, 60000);

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("perpendicular two-dot scene", () => {
  it("tracks both dots across the full clip", () => {
    expect(tracksDoc.video).toEqual({
      width: 320,
      height: 240,
      frame_count: 100,
      fps: 30,
    });
    // one full-length track per dot, heading along its line
    const long = tracksDoc.tracks.filter((t) => t.points.length >= 95);
    expect(long.length).toBeGreaterThanOrEqual(2);
    const headings = long.map((t) => {
      const [, u0, v0] = t.points[0];
      const [, u1, v1] = t.points[t.points.length - 1];
      return lineAngle(u1 - u0, v1 - v0);
    });
    expect(
      headings.some((h) => angleSeparation(h, PERPENDICULAR_SCENE.angleA) < 2)
    ).toBe(true);
    expect(
      headings.some((h) => angleSeparation(h, PERPENDICULAR_SCENE.angleB) < 2)
    ).toBe(true);
  });

  it("matches segments along both lines in every stride pair", () => {
    expect(segmentsDoc.stride).toBe(6);
    expect(segmentsDoc.matches.length).toBeGreaterThan(150);
    let nearA = 0;
    let nearB = 0;
    for (const [fa, fb, u1, v1, u2, v2] of segmentsDoc.matches) {
      expect(fb - fa).toBe(6);
      const angle = lineAngle(u2 - u1, v2 - v1);
      if (angleSeparation(angle, PERPENDICULAR_SCENE.angleA) < 5) nearA++;
      else if (angleSeparation(angle, PERPENDICULAR_SCENE.angleB) < 5) nearB++;
    }
    // every match belongs to one of the two motions
    expect(nearA + nearB).toBe(segmentsDoc.matches.length);
    expect(nearA).toBeGreaterThan(60);
    expect(nearB).toBeGreaterThan(60);
  });

  it("feeds the calibration pipeline, which sees two peaks 90 degrees apart", () => {
    const tracksPath = path.join(dir, "tracks.json");
    const segmentsPath = path.join(dir, "segments.json");
    fs.writeFileSync(tracksPath, JSON.stringify(tracksDoc) + "\n");
    fs.writeFileSync(segmentsPath, JSON.stringify(segmentsDoc) + "\n");

    const stdout = execFileSync(
      "python3",
      ["-c", PY_CHECK, tracksPath, segmentsPath],
      { encoding: "utf8" }
    );
    const report = JSON.parse(stdout) as {
      n_tracks: number;
      frame_count: number;
      stride: number;
      n_matches: number;
      n_segments: number;
      peaks: [number, number];
    };

    // the loaders accepted both documents and saw all the data
    expect(report.n_tracks).toBe(tracksDoc.tracks.length);
    expect(report.frame_count).toBe(100);
    expect(report.stride).toBe(6);
    expect(report.n_matches).toBe(segmentsDoc.matches.length);
    expect(report.n_segments).toBeGreaterThan(150);

    // two dominant directions, perpendicular within 5 degrees
    const [t1, t2] = report.peaks;
    expect(angleSeparation(t1, t2)).toBeGreaterThanOrEqual(85);
    expect(angleSeparation(t1, t2)).toBeLessThanOrEqual(95);

    // and they are the scene's own line angles
    const toTruth = (peak: number) =>
      Math.min(
        angleSeparation(peak, PERPENDICULAR_SCENE.angleA),
        angleSeparation(peak, PERPENDICULAR_SCENE.angleB)
      );
    expect(toTruth(t1)).toBeLessThan(3);
    expect(toTruth(t2)).toBeLessThan(3);
  }, 30000);
});
