/**
 * Synthetic video fixtures. Scenes are built from Gaussian dots moving on
 * straight lines over a black background: the profile is smooth enough
 * for subpixel flow and the ground-truth motion is known exactly.
 */

import * as fs from "fs";

import { createImage, GrayImage } from "../src/image";

/** Serialize frames as a mono YUV4MPEG2 stream. */
export function writeY4m(
  path: string,
  frames: GrayImage[],
  fps = 30
): void {
  const { width, height } = frames[0];
  const parts: Buffer[] = [
    Buffer.from(`YUV4MPEG2 W${width} H${height} F${fps}:1 Ip A1:1 Cmono\n`, "latin1"),
  ];
  const marker = Buffer.from("FRAME\n", "latin1");
  for (const frame of frames) {
    parts.push(marker);
    const plane = Buffer.alloc(width * height);
    for (let i = 0; i < plane.length; i++) {
      plane[i] = Math.max(0, Math.min(255, Math.round(frame.data[i])));
    }
    parts.push(plane);
  }
  fs.writeFileSync(path, Buffer.concat(parts));
}

/** Add a Gaussian blob; tails beyond 4 sigma are skipped. */
export function renderDot(
  img: GrayImage,
  cx: number,
  cy: number,
  sigma: number,
  amplitude: number
): void {
  const reach = Math.ceil(4 * sigma);
  const x0 = Math.max(0, Math.floor(cx) - reach);
  const x1 = Math.min(img.width - 1, Math.ceil(cx) + reach);
  const y0 = Math.max(0, Math.floor(cy) - reach);
  const y1 = Math.min(img.height - 1, Math.ceil(cy) + reach);
  const inv = 1 / (2 * sigma * sigma);
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.data[y * img.width + x] += amplitude * Math.exp(-d2 * inv);
    }
  }
}

export interface MovingDot {
  start: [number, number];
  /** Pixels per frame. */
  velocity: [number, number];
  sigma: number;
  amplitude: number;
}

export function renderScene(
  width: number,
  height: number,
  frameCount: number,
  dots: MovingDot[]
): GrayImage[] {
  const frames: GrayImage[] = [];
  for (let t = 0; t < frameCount; t++) {
    const img = createImage(width, height);
    for (const dot of dots) {
      renderDot(
        img,
        dot.start[0] + dot.velocity[0] * t,
        dot.start[1] + dot.velocity[1] * t,
        dot.sigma,
        dot.amplitude
      );
    }
    frames.push(img);
  }
  return frames;
}

/**
 * The reference scene: two dots on perpendicular straight lines, oriented
 * at 20 and 110 degrees so neither sits on the 0/180 histogram seam. The
 * paths stay more than 80 px apart at all times and clear every border by
 * at least 20 px over the full 100 frames.
 */
export const PERPENDICULAR_SCENE = {
  width: 320,
  height: 240,
  frameCount: 100,
  fps: 30,
  angleA: 20.0,
  angleB: 110.0,
  dots: [
    {
      start: [30, 40] as [number, number],
      velocity: [
        2.0 * Math.cos((20.0 * Math.PI) / 180),
        2.0 * Math.sin((20.0 * Math.PI) / 180),
      ] as [number, number],
      sigma: 2.0,
      amplitude: 220,
    },
    {
      start: [270, 30] as [number, number],
      velocity: [
        1.8 * Math.cos((110.0 * Math.PI) / 180),
        1.8 * Math.sin((110.0 * Math.PI) / 180),
      ] as [number, number],
      sigma: 2.6,
      amplitude: 235,
    },
  ] as MovingDot[],
};

export function perpendicularSceneFrames(): GrayImage[] {
  const s = PERPENDICULAR_SCENE;
  return renderScene(s.width, s.height, s.frameCount, s.dots);
}

/** Undirected angle of a displacement in degrees on [0, 180). */
export function lineAngle(dx: number, dy: number): number {
  const a = (Math.atan2(dy, dx) * 180) / Math.PI;
  return ((a % 180) + 180) % 180;
}

/** Circular distance between two undirected line angles, in [0, 90]. */
export function angleSeparation(a: number, b: number): number {
  const d = Math.abs(a - b) % 180;
  return Math.min(d, 180 - d);
}
