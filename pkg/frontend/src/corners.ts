/**
 * Shi-Tomasi corner detection: score each pixel by the smaller eigenvalue
 * of the local gradient structure tensor, keep local maxima above a
 * fraction of the global best, then thin the survivors with a greedy
 * minimum-distance pass so the strongest corners win.
 */

import { computeGradients, GrayImage } from "./image";

export interface Corner {
  x: number;
  y: number;
  /** Min-eigenvalue response; larger is more trackable. */
  score: number;
}

export interface CornerConfig {
  /** Upper bound on the number of corners returned. */
  maxCorners: number;
  /** Corners scoring below qualityLevel * best are discarded. */
  qualityLevel: number;
  /** Minimum pixel distance between accepted corners. */
  minDistance: number;
  /** Half-width of the structure-tensor window. */
  blockRadius: number;
  /** Pixels this close to a border are never selected. */
  borderMargin: number;
}

export const DEFAULT_CORNER_CONFIG: CornerConfig = {
  maxCorners: 400,
  qualityLevel: 0.02,
  minDistance: 8,
  blockRadius: 2,
  borderMargin: 10,
};

/**
 * Detect corners in a grayscale frame.
 *
 * An optional mask restricts detection: a corner at (x, y) is kept only
 * when mask[y * width + x] is nonzero. The mask must match the frame size.
 */
export function detectCorners(
  img: GrayImage,
  config: Partial<CornerConfig> = {},
  mask?: Uint8Array
): Corner[] {
  const cfg = { ...DEFAULT_CORNER_CONFIG, ...config };
  const { width: w, height: h } = img;
  const { gx, gy } = computeGradients(img);

  // Integral images of the gradient products make the windowed structure
  // tensor O(1) per pixel regardless of block radius.
  const ixx = integral(gx, gx, w, h);
  const ixy = integral(gx, gy, w, h);
  const iyy = integral(gy, gy, w, h);

  const r = cfg.blockRadius;
  const margin = Math.max(cfg.borderMargin, r + 1);
  const response = new Float32Array(w * h);
  let best = 0;
  for (let y = margin; y < h - margin; y++) {
    for (let x = margin; x < w - margin; x++) {
      if (mask && mask[y * w + x] === 0) continue;
      const sxx = boxSum(ixx, w, x - r, y - r, x + r, y + r);
      const sxy = boxSum(ixy, w, x - r, y - r, x + r, y + r);
      const syy = boxSum(iyy, w, x - r, y - r, x + r, y + r);
      // min eigenvalue of [[sxx, sxy], [sxy, syy]]
      const tr = 0.5 * (sxx + syy);
      const det = sxx * syy - sxy * sxy;
      const lam = tr - Math.sqrt(Math.max(tr * tr - det, 0));
      response[y * w + x] = lam;
      if (lam > best) best = lam;
    }
  }
  if (best <= 0) return [];

  // 3x3 non-max suppression above the quality floor.
  const threshold = cfg.qualityLevel * best;
  const candidates: Corner[] = [];
  for (let y = margin; y < h - margin; y++) {
    for (let x = margin; x < w - margin; x++) {
      const v = response[y * w + x];
      if (v < threshold) continue;
      let isMax = true;
      for (let dy = -1; dy <= 1 && isMax; dy++) {
        for (let dx = -1; dx <= 1; dx++) {
          if (dx === 0 && dy === 0) continue;
          if (response[(y + dy) * w + (x + dx)] > v) {
            isMax = false;
            break;
          }
        }
      }
      if (isMax) candidates.push({ x, y, score: v });
    }
  }

  // Greedy strongest-first thinning.
  candidates.sort((a, b) => b.score - a.score);
  const kept: Corner[] = [];
  const minDist2 = cfg.minDistance * cfg.minDistance;
  for (const c of candidates) {
    let ok = true;
    for (const k of kept) {
      const dx = c.x - k.x;
      const dy = c.y - k.y;
      if (dx * dx + dy * dy < minDist2) {
        ok = false;
        break;
      }
    }
    if (ok) {
      kept.push(refine(c, response, w));
      if (kept.length >= cfg.maxCorners) break;
    }
  }
  return kept;
}

/**
 * Subpixel localization: fit a parabola through the response and its two
 * axis neighbors; the vertex offset is clamped to half a pixel.
 */
function refine(c: Corner, response: Float32Array, w: number): Corner {
  const i = c.y * w + c.x;
  const dx = parabolicOffset(response[i - 1], response[i], response[i + 1]);
  const dy = parabolicOffset(response[i - w], response[i], response[i + w]);
  return { x: c.x + dx, y: c.y + dy, score: c.score };
}

function parabolicOffset(left: number, center: number, right: number): number {
  const denom = left - 2 * center + right;
  if (denom >= -1e-12) return 0; // not a strict local max along this axis
  const offset = (0.5 * (left - right)) / denom;
  return Math.max(-0.5, Math.min(0.5, offset));
}

/** Summed-area table of a(i) * b(i), padded by one row/column of zeros. */
function integral(
  a: Float32Array,
  b: Float32Array,
  w: number,
  h: number
): Float64Array {
  const out = new Float64Array((w + 1) * (h + 1));
  for (let y = 0; y < h; y++) {
    let rowSum = 0;
    for (let x = 0; x < w; x++) {
      rowSum += a[y * w + x] * b[y * w + x];
      out[(y + 1) * (w + 1) + (x + 1)] = out[y * (w + 1) + (x + 1)] + rowSum;
    }
  }
  return out;
}

/** Inclusive box sum over [x0, x1] x [y0, y1] from a padded integral image. */
function boxSum(
  ii: Float64Array,
  w: number,
  x0: number,
  y0: number,
  x1: number,
  y1: number
): number {
  const s = w + 1;
  return (
    ii[(y1 + 1) * s + (x1 + 1)] -
    ii[y0 * s + (x1 + 1)] -
    ii[(y1 + 1) * s + x0] +
    ii[y0 * s + x0]
  );
}
