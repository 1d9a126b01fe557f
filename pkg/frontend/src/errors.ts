/**
 * Error types raised by the tracker. Both carry a plain message; callers
 * that want structured output (the CLI) key off the class name.
 */

/** The input video could not be opened or is unusable for tracking. */
export class VideoOpenError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "VideoOpenError";
  }
}

/** No trackable keypoints were found in the first frame of the range. */
export class NoKeypointsError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NoKeypointsError";
  }
}
