/**
 * Pyramidal Lucas-Kanade sparse optical flow. Each point is refined
 * coarse-to-fine; at every pyramid level Newton iterations solve the 2x2
 * normal equations of the brightness-constancy linearization
 *
 *   [sum Ix*Ix  sum Ix*Iy] [du]   [sum It*Ix]
 *   [sum Ix*Iy  sum Iy*Iy] [dv] = [sum It*Iy]
 *
 * over a fixed window around the point. A forward-backward consistency
 * check rejects drifting tracks.
 */

import { buildPyramid, GrayImage, inBounds, sampleBilinear } from "./image";

export interface FlowConfig {
  /** Half-width of the correlation window (window is 2r+1 square). */
  windowRadius: number;
  /** Pyramid levels including the full-resolution base. */
  pyramidLevels: number;
  /** Newton iterations per level. */
  maxIterations: number;
  /** Stop iterating once the update is below this many pixels. */
  epsilon: number;
  /** Reject a track when the backward pass misses the start by more px. */
  maxBackwardError: number;
}

export const DEFAULT_FLOW_CONFIG: FlowConfig = {
  windowRadius: 5,
  pyramidLevels: 3,
  maxIterations: 20,
  epsilon: 0.01,
  maxBackwardError: 0.5,
};

export interface FlowResult {
  x: number;
  y: number;
  found: boolean;
}

/** Pyramids are built once per frame and shared across all points. */
export function makePyramid(img: GrayImage, config: FlowConfig): GrayImage[] {
  return buildPyramid(img, config.pyramidLevels);
}

/**
 * Track one point from the `prev` pyramid into the `next` pyramid.
 * Returns found=false when the point leaves the image, the local
 * structure is untrackable, or the solution fails to converge.
 *
 * Coarse levels are advisory: a point too close to a border (or too
 * weak) at a reduced scale simply skips that refinement instead of
 * failing, so only the full-resolution solve decides the outcome.
 */
export function trackPoint(
  prev: GrayImage[],
  next: GrayImage[],
  x: number,
  y: number,
  config: FlowConfig
): FlowResult {
  const levels = Math.min(prev.length, next.length);
  const scale = 1 << (levels - 1);
  let gx = x / scale;
  let gy = y / scale;

  for (let level = levels - 1; level >= 0; level--) {
    const lx = x / (1 << level);
    const ly = y / (1 << level);
    const result = iterateLevel(prev[level], next[level], lx, ly, gx, gy, config);
    if (result.found) {
      gx = result.x;
      gy = result.y;
    } else if (level === 0) {
      return { x: 0, y: 0, found: false };
    }
    if (level > 0) {
      gx *= 2;
      gy *= 2;
    }
  }
  return { x: gx, y: gy, found: true };
}

/**
 * Track with a forward-backward consistency check: the point is tracked
 * prev -> next, then the result is tracked back, and the round trip must
 * land within maxBackwardError of the start.
 */
export function trackPointChecked(
  prev: GrayImage[],
  next: GrayImage[],
  x: number,
  y: number,
  config: FlowConfig
): FlowResult {
  const fwd = trackPoint(prev, next, x, y, config);
  if (!fwd.found) return fwd;
  const back = trackPoint(next, prev, fwd.x, fwd.y, config);
  if (!back.found) return { x: 0, y: 0, found: false };
  const ex = back.x - x;
  const ey = back.y - y;
  if (ex * ex + ey * ey > config.maxBackwardError * config.maxBackwardError) {
    return { x: 0, y: 0, found: false };
  }
  return fwd;
}

function iterateLevel(
  prev: GrayImage,
  next: GrayImage,
  px: number,
  py: number,
  guessX: number,
  guessY: number,
  config: FlowConfig
): FlowResult {
  const r = config.windowRadius;
  const size = 2 * r + 1;
  const count = size * size;
  if (!inBounds(prev, px, py, r + 2)) return { x: 0, y: 0, found: false };

  // Template patch and its spatial gradients, sampled once per level.
  const patch = new Float32Array(count);
  const gradX = new Float32Array(count);
  const gradY = new Float32Array(count);
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  let idx = 0;
  for (let dy = -r; dy <= r; dy++) {
    for (let dx = -r; dx <= r; dx++, idx++) {
      const sx = px + dx;
      const sy = py + dy;
      patch[idx] = sampleBilinear(prev, sx, sy);
      const ix = 0.5 * (sampleBilinear(prev, sx + 1, sy) - sampleBilinear(prev, sx - 1, sy));
      const iy = 0.5 * (sampleBilinear(prev, sx, sy + 1) - sampleBilinear(prev, sx, sy - 1));
      gradX[idx] = ix;
      gradY[idx] = iy;
      sxx += ix * ix;
      sxy += ix * iy;
      syy += iy * iy;
    }
  }
  const det = sxx * syy - sxy * sxy;
  if (det < 1e-6 || sxx + syy < 1e-4) {
    return { x: 0, y: 0, found: false }; // flat or aperture-limited patch
  }

  let cx = guessX;
  let cy = guessY;
  for (let iter = 0; iter < config.maxIterations; iter++) {
    if (!inBounds(next, cx, cy, r + 2)) return { x: 0, y: 0, found: false };
    let bx = 0;
    let by = 0;
    idx = 0;
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++, idx++) {
        const diff = sampleBilinear(next, cx + dx, cy + dy) - patch[idx];
        bx += diff * gradX[idx];
        by += diff * gradY[idx];
      }
    }
    const du = -(syy * bx - sxy * by) / det;
    const dv = -(-sxy * bx + sxx * by) / det;
    cx += du;
    cy += dv;
    if (du * du + dv * dv < config.epsilon * config.epsilon) break;
  }
  if (!inBounds(next, cx, cy, r + 2)) return { x: 0, y: 0, found: false };
  return { x: cx, y: cy, found: true };
}
