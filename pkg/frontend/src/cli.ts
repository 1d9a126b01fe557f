#!/usr/bin/env node
/**
 * Command line front end. Reads one video, runs the requested extraction
 * stages, and writes their documents to disk:
 *
 *   autocalib-tracker --input clip.y4m --tracks tracks.json \
 *       --segments segments.json --stride 6 --mask roi.pgm
 *
 * Failures print a one-line JSON error object to stderr and exit 1, so
 * batch drivers can triage without scraping free-form text.
 */

import * as fs from "fs";
import yargs from "yargs";

import { readMask } from "./mask";
import { extractMatchedSegments, extractTracks } from "./tracker";
import { readY4m } from "./y4m";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .usage("Track keypoints in a .y4m video and emit calibration inputs")
    .option("input", {
      type: "string",
      demandOption: true,
      describe: "input video (YUV4MPEG2)",
    })
    .option("tracks", {
      type: "string",
      describe: "write followed keypoint tracks to this JSON file",
    })
    .option("segments", {
      type: "string",
      describe: "write stride-separated matches to this JSON file",
    })
    .option("stride", {
      type: "number",
      default: 6,
      describe: "frame separation of matched pairs",
    })
    .option("mask", {
      type: "string",
      describe: "PGM region-of-interest mask (nonzero = search here)",
    })
    .option("max-keypoints", {
      type: "number",
      default: 400,
      describe: "detector budget per frame",
    })
    .option("track-start", {
      type: "number",
      default: 0,
      describe: "first frame of the tracking range",
    })
    .option("track-end", {
      type: "number",
      describe: "end of the tracking range (exclusive)",
    })
    .check((a) => {
      if (!a.tracks && !a.segments) {
        throw new Error("nothing to do: pass --tracks and/or --segments");
      }
      if (!(Number.isInteger(a.stride) && a.stride >= 1)) {
        throw new Error(`--stride must be an integer >= 1, got ${a.stride}`);
      }
      return true;
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parseSync();

  const video = readY4m(args.input);
  const mask = args.mask
    ? readMask(args.mask, video.width, video.height)
    : undefined;
  const options = {
    maxKeypoints: args.maxKeypoints,
    stride: args.stride,
    trackStart: args.trackStart,
    trackEnd: args.trackEnd,
  };

  if (args.tracks) {
    const doc = extractTracks(video, options, mask);
    fs.writeFileSync(args.tracks, JSON.stringify(doc) + "\n");
    console.log(
      `wrote ${doc.tracks.length} tracks over ${video.frames.length} frames to ${args.tracks}`
    );
  }
  if (args.segments) {
    const doc = extractMatchedSegments(video, options, mask);
    fs.writeFileSync(args.segments, JSON.stringify(doc) + "\n");
    console.log(
      `wrote ${doc.matches.length} matches at stride ${doc.stride} to ${args.segments}`
    );
  }
  return 0;
}

/* istanbul ignore next -- process entry point */
if (require.main === module) {
  try {
    process.exitCode = main(process.argv.slice(2));
  } catch (err) {
    const e = err as Error;
    console.error(
      JSON.stringify({ error: { type: e.name || "Error", message: e.message } })
    );
    process.exitCode = 1;
  }
}
