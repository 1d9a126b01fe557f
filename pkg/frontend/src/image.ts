/**
 * Grayscale image buffers and the sampling / filtering primitives the
 * tracker is built on. Pixels are stored row-major as Float32 intensities
 * in [0, 255]; (u, v) coordinates have the origin at the top-left corner
 * with u growing right and v growing down, matching the convention of the
 * trajectory files this package emits.
 */

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major intensities, length width * height. */
  data: Float32Array;
}

export function createImage(width: number, height: number): GrayImage {
  return { width, height, data: new Float32Array(width * height) };
}

/**
 * Bilinear sample at a subpixel location. Coordinates are clamped to the
 * valid interpolation domain, so callers must do their own bounds checks
 * when clamping would bias a result.
 */
export function sampleBilinear(img: GrayImage, x: number, y: number): number {
  const xc = Math.min(Math.max(x, 0), img.width - 1.001);
  const yc = Math.min(Math.max(y, 0), img.height - 1.001);
  const x0 = Math.floor(xc);
  const y0 = Math.floor(yc);
  const fx = xc - x0;
  const fy = yc - y0;
  const i = y0 * img.width + x0;
  const d = img.data;
  const top = d[i] * (1 - fx) + d[i + 1] * fx;
  const bot = d[i + img.width] * (1 - fx) + d[i + img.width + 1] * fx;
  return top * (1 - fy) + bot * fy;
}

/** True when (x, y) sits at least `margin` pixels inside every border. */
export function inBounds(
  img: GrayImage,
  x: number,
  y: number,
  margin: number
): boolean {
  return (
    x >= margin &&
    y >= margin &&
    x <= img.width - 1 - margin &&
    y <= img.height - 1 - margin
  );
}

/**
 * Central-difference gradients. Border pixels use one-sided differences so
 * the output arrays stay the same size as the input.
 */
export function computeGradients(img: GrayImage): {
  gx: Float32Array;
  gy: Float32Array;
} {
  const { width: w, height: h, data } = img;
  const gx = new Float32Array(w * h);
  const gy = new Float32Array(w * h);
  for (let y = 0; y < h; y++) {
    const row = y * w;
    for (let x = 0; x < w; x++) {
      const xm = x > 0 ? x - 1 : x;
      const xp = x < w - 1 ? x + 1 : x;
      const ym = y > 0 ? y - 1 : y;
      const yp = y < h - 1 ? y + 1 : y;
      gx[row + x] = (data[row + xp] - data[row + xm]) / (xp - xm);
      gy[row + x] = (data[yp * w + x] - data[ym * w + x]) / (yp - ym);
    }
  }
  return { gx, gy };
}

/**
 * Halve an image with 2x2 box averaging. Odd trailing rows/columns are
 * dropped, which is what the flow pyramid expects.
 */
export function downsample(img: GrayImage): GrayImage {
  const w = Math.floor(img.width / 2);
  const h = Math.floor(img.height / 2);
  const out = createImage(w, h);
  for (let y = 0; y < h; y++) {
    const src0 = 2 * y * img.width;
    const src1 = src0 + img.width;
    for (let x = 0; x < w; x++) {
      const sx = 2 * x;
      out.data[y * w + x] =
        0.25 *
        (img.data[src0 + sx] +
          img.data[src0 + sx + 1] +
          img.data[src1 + sx] +
          img.data[src1 + sx + 1]);
    }
  }
  return out;
}

/**
 * Image pyramid for coarse-to-fine flow. Level 0 is the input; each level
 * above it halves the resolution. Levels whose smaller side would drop
 * below 16 px are omitted.
 */
export function buildPyramid(img: GrayImage, levels: number): GrayImage[] {
  const pyramid = [img];
  for (let l = 1; l < levels; l++) {
    const prev = pyramid[pyramid.length - 1];
    if (Math.min(prev.width, prev.height) < 32) break;
    pyramid.push(downsample(prev));
  }
  return pyramid;
}
