import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { VideoOpenError } from "../src/errors";
import { createImage } from "../src/image";
import { readY4m } from "../src/y4m";
import { renderDot, writeY4m } from "./fixtures";

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "y4m-"));
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("readY4m", () => {
  it("round-trips mono frames written by the fixture writer", () => {
    const frames = [createImage(32, 20), createImage(32, 20)];
    renderDot(frames[0], 10, 6, 1.5, 200);
    renderDot(frames[1], 12, 8, 1.5, 200);
    const file = path.join(dir, "roundtrip.y4m");
    writeY4m(file, frames, 25);

    const video = readY4m(file);
    expect(video.width).toBe(32);
    expect(video.height).toBe(20);
    expect(video.fps).toBe(25);
    expect(video.frames).toHaveLength(2);
    // intensities survive up to the 8-bit quantization of the container
    const peak = video.frames[0].data[6 * 32 + 10];
    expect(Math.abs(peak - 200)).toBeLessThanOrEqual(0.5);
  });

  it("parses rational frame rates", () => {
    const file = path.join(dir, "ntsc.y4m");
    const plane = Buffer.alloc(8 * 4, 17);
    fs.writeFileSync(
      file,
      Buffer.concat([
        Buffer.from("YUV4MPEG2 W8 H4 F30000:1001 Ip A1:1 Cmono\n", "latin1"),
        Buffer.from("FRAME\n", "latin1"),
        plane,
      ])
    );
    const video = readY4m(file);
    expect(video.fps).toBeCloseTo(29.97, 2);
    expect(video.frames[0].data[0]).toBe(17);
  });

  it("skips 4:2:0 chroma planes and keeps luma intact", () => {
    const file = path.join(dir, "chroma.y4m");
    const luma0 = Buffer.alloc(16 * 8, 40);
    const luma1 = Buffer.alloc(16 * 8, 90);
    const chroma = Buffer.alloc((16 * 8) / 2, 128);
    fs.writeFileSync(
      file,
      Buffer.concat([
        Buffer.from("YUV4MPEG2 W16 H8 F24:1 C420jpeg\n", "latin1"),
        Buffer.from("FRAME\n", "latin1"),
        luma0,
        chroma,
        Buffer.from("FRAME\n", "latin1"),
        luma1,
        chroma,
      ])
    );
    const video = readY4m(file);
    expect(video.frames).toHaveLength(2);
    expect(video.frames[0].data[50]).toBe(40);
    expect(video.frames[1].data[50]).toBe(90);
  });

  it("rejects a missing file", () => {
    expect(() => readY4m(path.join(dir, "absent.y4m"))).toThrow(VideoOpenError);
  });

  it("rejects non-y4m content", () => {
    const file = path.join(dir, "bogus.y4m");
    fs.writeFileSync(file, "RIFF not a y4m stream\n");
    expect(() => readY4m(file)).toThrow(VideoOpenError);
  });

  it("rejects truncated frame data", () => {
    const file = path.join(dir, "short.y4m");
    fs.writeFileSync(
      file,
      Buffer.concat([
        Buffer.from("YUV4MPEG2 W8 H8 F30:1 Cmono\n", "latin1"),
        Buffer.from("FRAME\n", "latin1"),
        Buffer.alloc(10), // 54 bytes short of one plane
      ])
    );
    expect(() => readY4m(file)).toThrow(/truncated/);
  });

  it("rejects a stream with no frames", () => {
    const file = path.join(dir, "empty.y4m");
    fs.writeFileSync(file, "YUV4MPEG2 W8 H8 F30:1 Cmono\n");
    expect(() => readY4m(file)).toThrow(/no frames/);
  });

  it("rejects unsupported colorspaces", () => {
    const file = path.join(dir, "badcs.y4m");
    fs.writeFileSync(file, "YUV4MPEG2 W8 H8 F30:1 C411\nFRAME\n");
    expect(() => readY4m(file)).toThrow(/colorspace/);
  });
});
