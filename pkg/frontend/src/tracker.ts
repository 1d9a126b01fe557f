/**
 * The two extraction stages. Both consume a decoded video and emit one of
 * the interchange documents:
 *
 *  - extractTracks seeds keypoints in the first frame of the configured
 *    range and follows them frame to frame with pyramidal optical flow.
 *    A point that is lost simply ends its track; frame indices in the
 *    output are absolute video frame numbers.
 *
 *  - extractMatchedSegments independently detects and descriptor-matches
 *    keypoints in every frame pair (a, a + stride), which tolerates the
 *    occlusions and appearance changes that break long-lived tracks.
 */

import {
  Corner,
  CornerConfig,
  DEFAULT_CORNER_CONFIG,
  detectCorners,
} from "./corners";
import {
  DEFAULT_MATCH_CONFIG,
  describeCorners,
  MatchConfig,
  matchDescriptors,
} from "./descriptors";
import { NoKeypointsError, VideoOpenError } from "./errors";
import {
  DEFAULT_FLOW_CONFIG,
  FlowConfig,
  makePyramid,
  trackPointChecked,
} from "./flow";
import { GrayImage } from "./image";
import {
  makeSegmentsDocument,
  makeTracksDocument,
  SegmentsDocument,
  TrackRecord,
  TracksDocument,
} from "./schema";
import { Video } from "./y4m";

export interface TrackerOptions {
  /** Detector budget for both stages. */
  maxKeypoints: number;
  /** Frame separation of matched segment pairs; must be >= 1. */
  stride: number;
  /** First frame (inclusive) of the tracking range. */
  trackStart: number;
  /** End frame (exclusive) of the tracking range; defaults to the video end. */
  trackEnd?: number;
  corner?: Partial<CornerConfig>;
  flow?: Partial<FlowConfig>;
  match?: Partial<MatchConfig>;
}

export const DEFAULT_TRACKER_OPTIONS: TrackerOptions = {
  maxKeypoints: 400,
  stride: 6,
  trackStart: 0,
};

/**
 * Follow first-frame keypoints through the video.
 *
 * Throws VideoOpenError when the requested range holds fewer than two
 * frames and NoKeypointsError when the detector comes up empty.
 */
export function extractTracks(
  video: Video,
  options: Partial<TrackerOptions> = {},
  mask?: Uint8Array
): TracksDocument {
  const opts = { ...DEFAULT_TRACKER_OPTIONS, ...options };
  const start = opts.trackStart;
  const end = opts.trackEnd ?? video.frames.length;
  if (start < 0 || end > video.frames.length || end - start < 2) {
    throw new VideoOpenError(
      `tracking range [${start}, ${end}) needs at least 2 of the video's ` +
        `${video.frames.length} frames`
    );
  }

  const flowCfg: FlowConfig = { ...DEFAULT_FLOW_CONFIG, ...opts.flow };
  const seeds = detectCorners(
    video.frames[start],
    { ...opts.corner, maxCorners: opts.maxKeypoints },
    mask
  );
  if (seeds.length === 0) {
    throw new NoKeypointsError(`no keypoints found in frame ${start}`);
  }

  const points: TrackRecord["points"][] = seeds.map((s) => [[start, s.x, s.y]]);
  const alive = seeds.map(() => true);
  const positions = seeds.map((s) => ({ x: s.x, y: s.y }));

  let prevPyramid = makePyramid(video.frames[start], flowCfg);
  for (let frame = start + 1; frame < end; frame++) {
    const nextPyramid = makePyramid(video.frames[frame], flowCfg);
    for (let i = 0; i < seeds.length; i++) {
      if (!alive[i]) continue;
      const p = positions[i];
      const result = trackPointChecked(prevPyramid, nextPyramid, p.x, p.y, flowCfg);
      if (!result.found) {
        alive[i] = false;
        continue;
      }
      p.x = result.x;
      p.y = result.y;
      points[i].push([frame, result.x, result.y]);
    }
    prevPyramid = nextPyramid;
  }

  // Single-point stubs carry no motion and are dropped.
  const tracks: TrackRecord[] = [];
  for (const pts of points) {
    if (pts.length >= 2) {
      tracks.push({ id: tracks.length, points: pts });
    }
  }
  return makeTracksDocument(
    {
      width: video.width,
      height: video.height,
      frame_count: video.frames.length,
      fps: video.fps,
    },
    tracks
  );
}

/**
 * Detect and match keypoints across every frame pair separated by
 * `stride`. A stride past the end of the video yields an empty (but
 * still valid) document.
 */
export function extractMatchedSegments(
  video: Video,
  options: Partial<TrackerOptions> = {},
  mask?: Uint8Array
): SegmentsDocument {
  const opts = { ...DEFAULT_TRACKER_OPTIONS, ...options };
  if (!(Number.isInteger(opts.stride) && opts.stride >= 1)) {
    throw new RangeError(`stride must be an integer >= 1, got ${opts.stride}`);
  }
  const matchCfg: MatchConfig = { ...DEFAULT_MATCH_CONFIG, ...opts.match };

  // Each frame serves as source of one pair and target of another, so
  // detection and description are computed once and cached.
  const cache = new Map<
    number,
    { corners: Corner[]; descriptors: Float32Array[] }
  >();
  const analyze = (index: number) => {
    let entry = cache.get(index);
    if (!entry) {
      const corners = detectCorners(
        video.frames[index],
        { ...opts.corner, maxCorners: opts.maxKeypoints },
        mask
      );
      entry = describeCorners(video.frames[index], corners, matchCfg);
      cache.set(index, entry);
    }
    return entry;
  };

  const rows: SegmentsDocument["matches"] = [];
  for (let a = 0; a + opts.stride < video.frames.length; a++) {
    const b = a + opts.stride;
    const fa = analyze(a);
    const fb = analyze(b);
    if (fa.corners.length === 0 || fb.corners.length === 0) continue;
    const pairs = matchDescriptors(
      fa.corners,
      fa.descriptors,
      fb.corners,
      fb.descriptors,
      matchCfg
    );
    for (const m of pairs) {
      rows.push([
        a,
        b,
        fa.corners[m.a].x,
        fa.corners[m.a].y,
        fb.corners[m.b].x,
        fb.corners[m.b].y,
      ]);
    }
    cache.delete(a); // frame a is never needed again
  }
  return makeSegmentsDocument(opts.stride, rows);
}

export type { GrayImage };
