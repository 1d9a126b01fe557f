/**
 * Region-of-interest masks. A mask is a grayscale PGM image (binary P5 or
 * ASCII P2) of the same size as the video frames: pixels with a nonzero
 * value are inside the region, zero pixels are ignored by the detectors.
 * PGM is used because every common imaging tool can write it and it needs
 * no decoding dependencies.
 */

import * as fs from "fs";

import { VideoOpenError } from "./errors";

/** Load a PGM mask and check it against the expected frame size. */
export function readMask(
  path: string,
  width: number,
  height: number
): Uint8Array {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(path);
  } catch (err) {
    throw new VideoOpenError(`cannot read mask file ${path}: ${err}`);
  }
  const mask = parsePgm(buf, path);
  if (mask.width !== width || mask.height !== height) {
    throw new VideoOpenError(
      `mask ${path} is ${mask.width}x${mask.height}, video is ${width}x${height}`
    );
  }
  return mask.data;
}

interface Pgm {
  width: number;
  height: number;
  data: Uint8Array;
}

function parsePgm(buf: Buffer, path: string): Pgm {
  const magic = buf.toString("latin1", 0, 2);
  if (magic !== "P5" && magic !== "P2") {
    throw new VideoOpenError(`mask ${path} is not a PGM image`);
  }

  // Header: magic, width, height, maxval — whitespace separated, with
  // optional '#' comment lines mixed in.
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < buf.length && isSpace(buf[pos])) pos++;
    if (pos < buf.length && buf[pos] === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < buf.length && !isSpace(buf[pos])) pos++;
    if (pos === start) {
      throw new VideoOpenError(`mask ${path} has a truncated PGM header`);
    }
    fields.push(parseInt(buf.toString("latin1", start, pos), 10));
  }
  const [width, height, maxval] = fields;
  if (!(width > 0) || !(height > 0) || !(maxval > 0) || maxval > 255) {
    throw new VideoOpenError(`mask ${path} has an unsupported PGM header`);
  }

  const data = new Uint8Array(width * height);
  if (magic === "P5") {
    pos += 1; // single whitespace byte after maxval
    if (pos + data.length > buf.length) {
      throw new VideoOpenError(`mask ${path} has truncated pixel data`);
    }
    for (let i = 0; i < data.length; i++) data[i] = buf[pos + i];
  } else {
    const text = buf.toString("latin1", pos);
    const values = text.split(/\s+/).filter((t) => t.length > 0);
    if (values.length < data.length) {
      throw new VideoOpenError(`mask ${path} has truncated pixel data`);
    }
    for (let i = 0; i < data.length; i++) data[i] = parseInt(values[i], 10);
  }
  return { width, height, data };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
