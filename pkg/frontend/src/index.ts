/** Public API surface. */

export { Corner, CornerConfig, DEFAULT_CORNER_CONFIG, detectCorners } from "./corners";
export {
  DEFAULT_MATCH_CONFIG,
  describeCorners,
  Match,
  MatchConfig,
  matchDescriptors,
} from "./descriptors";
export { NoKeypointsError, VideoOpenError } from "./errors";
export { DEFAULT_FLOW_CONFIG, FlowConfig, trackPoint, trackPointChecked } from "./flow";
export { createImage, GrayImage, sampleBilinear } from "./image";
export { readMask } from "./mask";
export {
  makeSegmentsDocument,
  makeTracksDocument,
  SEGMENTS_SCHEMA,
  SegmentsDocument,
  TrackRecord,
  TracksDocument,
  TRACKS_SCHEMA,
  VideoMeta,
} from "./schema";
export {
  DEFAULT_TRACKER_OPTIONS,
  extractMatchedSegments,
  extractTracks,
  TrackerOptions,
} from "./tracker";
export { readY4m, Video } from "./y4m";
