/**
 * Patch descriptors and matching for the segment extractor. The descriptor
 * is deliberately simple — a mean-removed, L2-normalized grid of bilinear
 * intensity samples around the keypoint — which is plenty for the short
 * inter-frame baselines this tool sees, and keeps the package free of
 * native dependencies. Swap in something fancier via MatchConfig if the
 * footage demands it.
 */

import { Corner } from "./corners";
import { GrayImage, inBounds, sampleBilinear } from "./image";

export interface MatchConfig {
  /** Samples per descriptor side (descriptor length is gridSize^2). */
  gridSize: number;
  /** Pixel spacing between descriptor samples. */
  gridStep: number;
  /** Candidate pairs farther apart than this many pixels are not considered. */
  maxDisplacement: number;
  /** Accept only matches with squared descriptor distance below this. */
  maxDistance: number;
  /** Lowe ratio: best must beat second-best by this factor (squared dists). */
  ratio: number;
}

export const DEFAULT_MATCH_CONFIG: MatchConfig = {
  gridSize: 8,
  gridStep: 2,
  maxDisplacement: 48,
  maxDistance: 0.8,
  ratio: 0.85,
};

/**
 * Descriptors for a list of corners. Corners too close to the border to
 * sample are dropped, so the returned corner list can be shorter than the
 * input; descriptors[i] always describes corners[i] of the result.
 */
export function describeCorners(
  img: GrayImage,
  corners: Corner[],
  config: MatchConfig
): { corners: Corner[]; descriptors: Float32Array[] } {
  const reach = (config.gridSize / 2) * config.gridStep + 1;
  const keptCorners: Corner[] = [];
  const descriptors: Float32Array[] = [];
  for (const c of corners) {
    if (!inBounds(img, c.x, c.y, reach)) continue;
    descriptors.push(sampleDescriptor(img, c.x, c.y, config));
    keptCorners.push(c);
  }
  return { corners: keptCorners, descriptors };
}

function sampleDescriptor(
  img: GrayImage,
  x: number,
  y: number,
  config: MatchConfig
): Float32Array {
  const n = config.gridSize;
  const step = config.gridStep;
  const half = ((n - 1) / 2) * step;
  const out = new Float32Array(n * n);
  let mean = 0;
  let idx = 0;
  for (let gy = 0; gy < n; gy++) {
    for (let gx = 0; gx < n; gx++, idx++) {
      const v = sampleBilinear(img, x - half + gx * step, y - half + gy * step);
      out[idx] = v;
      mean += v;
    }
  }
  mean /= out.length;
  let norm = 0;
  for (let i = 0; i < out.length; i++) {
    out[i] -= mean;
    norm += out[i] * out[i];
  }
  norm = Math.sqrt(norm);
  if (norm > 1e-6) {
    for (let i = 0; i < out.length; i++) out[i] /= norm;
  }
  return out;
}

function distance2(a: Float32Array, b: Float32Array): number {
  let s = 0;
  for (let i = 0; i < a.length; i++) {
    const d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

export interface Match {
  /** Index into the first corner list. */
  a: number;
  /** Index into the second corner list. */
  b: number;
}

/**
 * Match two descriptor sets. A pair survives only if it is within the
 * displacement gate, passes the absolute distance and Lowe ratio tests,
 * and is the mutual best choice in both directions.
 */
export function matchDescriptors(
  cornersA: Corner[],
  descA: Float32Array[],
  cornersB: Corner[],
  descB: Float32Array[],
  config: MatchConfig
): Match[] {
  const gate2 = config.maxDisplacement * config.maxDisplacement;
  const ratio2 = config.ratio * config.ratio;

  const bestFor = (
    from: Corner[],
    fromDesc: Float32Array[],
    to: Corner[],
    toDesc: Float32Array[]
  ): Int32Array => {
    const out = new Int32Array(from.length).fill(-1);
    for (let i = 0; i < from.length; i++) {
      let best = Infinity;
      let second = Infinity;
      let bestJ = -1;
      for (let j = 0; j < to.length; j++) {
        const dx = to[j].x - from[i].x;
        const dy = to[j].y - from[i].y;
        if (dx * dx + dy * dy > gate2) continue;
        const d = distance2(fromDesc[i], toDesc[j]);
        if (d < best) {
          second = best;
          best = d;
          bestJ = j;
        } else if (d < second) {
          second = d;
        }
      }
      if (bestJ < 0 || best > config.maxDistance) continue;
      if (second < Infinity && best > ratio2 * second) continue;
      out[i] = bestJ;
    }
    return out;
  };

  const forward = bestFor(cornersA, descA, cornersB, descB);
  const backward = bestFor(cornersB, descB, cornersA, descA);
  const matches: Match[] = [];
  for (let i = 0; i < forward.length; i++) {
    const j = forward[i];
    if (j >= 0 && backward[j] === i) matches.push({ a: i, b: j });
  }
  return matches;
}
