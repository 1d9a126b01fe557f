/**
 * The two JSON documents this package emits. Field names and layouts are
 * part of the interchange contract with the calibration pipeline that
 * consumes them, so they are spelled out here once and reused by the
 * extractors, the CLI, and the tests.
 */

export const TRACKS_SCHEMA = "autocalib-tracks/1";
export const SEGMENTS_SCHEMA = "autocalib-segments/1";

export interface VideoMeta {
  width: number;
  height: number;
  frame_count: number;
  fps: number;
}

export interface TrackRecord {
  id: number;
  /** Rows of [frame_index, u, v] with pixel origin at the top-left. */
  points: [number, number, number][];
}

export interface TracksDocument {
  schema: typeof TRACKS_SCHEMA;
  video: VideoMeta;
  tracks: TrackRecord[];
}

export interface SegmentsDocument {
  schema: typeof SEGMENTS_SCHEMA;
  stride: number;
  /** Rows of [frame_a, frame_b, u1, v1, u2, v2] with frame_b - frame_a == stride. */
  matches: [number, number, number, number, number, number][];
}

export function makeTracksDocument(
  video: VideoMeta,
  tracks: TrackRecord[]
): TracksDocument {
  return { schema: TRACKS_SCHEMA, video, tracks };
}

export function makeSegmentsDocument(
  stride: number,
  matches: [number, number, number, number, number, number][]
): SegmentsDocument {
  return { schema: SEGMENTS_SCHEMA, stride, matches };
}
