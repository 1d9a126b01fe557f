/**
 * Minimal YUV4MPEG2 (.y4m) reader. The container is uncompressed planar
 * YCbCr with a one-line ASCII stream header and a short marker before each
 * frame, which makes it the simplest interchange format that standard
 * tooling (ffmpeg et al.) can produce losslessly:
 *
 *   YUV4MPEG2 W<width> H<height> F<num>:<den> [Ip] [A1:1] [C<space>]\n
 *   FRAME\n <planes> FRAME\n <planes> ...
 *
 * Only the luma plane is kept — the tracker works in grayscale — but the
 * chroma planes of 4:2:0 / 4:2:2 / 4:4:4 streams are sized and skipped
 * correctly. Mono streams carry no chroma at all.
 */

import * as fs from "fs";

import { VideoOpenError } from "./errors";
import { createImage, GrayImage } from "./image";

export interface Video {
  width: number;
  height: number;
  /** Frames per second from the stream header (F tag), e.g. 30000:1001 -> 29.97. */
  fps: number;
  /** Decoded luma planes, one per frame, in stream order. */
  frames: GrayImage[];
}

const MAGIC = "YUV4MPEG2";

/** Bytes of chroma accompanying one luma plane, by colorspace tag. */
function chromaBytes(colorspace: string, ySize: number): number {
  if (colorspace === "mono") return 0;
  if (colorspace.startsWith("420")) return ySize / 2;
  if (colorspace.startsWith("422")) return ySize;
  if (colorspace.startsWith("444")) return 2 * ySize;
  throw new VideoOpenError(`unsupported y4m colorspace C${colorspace}`);
}

/**
 * Read and decode an entire .y4m file.
 *
 * Throws VideoOpenError when the file is missing, is not a YUV4MPEG2
 * stream, declares an unsupported layout, or ends mid-frame.
 */
export function readY4m(path: string): Video {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(path);
  } catch (err) {
    throw new VideoOpenError(`cannot read video file ${path}: ${err}`);
  }

  const headerEnd = buf.indexOf(0x0a);
  if (headerEnd < 0) {
    throw new VideoOpenError(`${path} is not a YUV4MPEG2 stream`);
  }
  const header = buf.toString("latin1", 0, headerEnd);
  const tokens = header.split(" ");
  if (tokens[0] !== MAGIC) {
    throw new VideoOpenError(`${path} is not a YUV4MPEG2 stream`);
  }

  let width = 0;
  let height = 0;
  let fps = 0;
  let colorspace = "420jpeg";
  for (const token of tokens.slice(1)) {
    if (token.length === 0) continue;
    const value = token.slice(1);
    switch (token[0]) {
      case "W":
        width = parseInt(value, 10);
        break;
      case "H":
        height = parseInt(value, 10);
        break;
      case "F": {
        const [num, den] = value.split(":").map(Number);
        if (!(num > 0) || !(den > 0)) {
          throw new VideoOpenError(`bad frame rate tag F${value} in ${path}`);
        }
        fps = num / den;
        break;
      }
      case "C":
        colorspace = value;
        break;
      default:
        break; // interlacing, aspect, and X metadata don't affect decoding
    }
  }
  if (!(width > 0) || !(height > 0)) {
    throw new VideoOpenError(`missing frame dimensions in ${path}`);
  }
  if (!(fps > 0)) {
    throw new VideoOpenError(`missing frame rate in ${path}`);
  }

  const ySize = width * height;
  const frameBytes = ySize + chromaBytes(colorspace, ySize);
  const frames: GrayImage[] = [];
  let pos = headerEnd + 1;
  while (pos < buf.length) {
    const markerEnd = buf.indexOf(0x0a, pos);
    if (markerEnd < 0) {
      throw new VideoOpenError(`truncated frame marker in ${path}`);
    }
    const marker = buf.toString("latin1", pos, markerEnd);
    if (!marker.startsWith("FRAME")) {
      throw new VideoOpenError(`corrupt frame marker in ${path}`);
    }
    pos = markerEnd + 1;
    if (pos + frameBytes > buf.length) {
      throw new VideoOpenError(
        `truncated frame data in ${path} (frame ${frames.length})`
      );
    }
    const img = createImage(width, height);
    for (let i = 0; i < ySize; i++) {
      img.data[i] = buf[pos + i];
    }
    frames.push(img);
    pos += frameBytes;
  }

  if (frames.length === 0) {
    throw new VideoOpenError(`${path} contains no frames`);
  }
  return { width, height, fps, frames };
}
