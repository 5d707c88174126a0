/**
 * Client-side per-pixel color mapping.
 *
 * The full map y = x @ P @ T @ Q is linear per pixel, so the client folds it
 * into one 3x3 matrix per (projections, T) pair and applies that — the fast
 * path the preset slider rides on. stagedApply mirrors the engine's staged
 * evaluation order and exists to validate the fold (agreement <= 1e-5).
 */

import type { FloatImage } from "./image.js";

/** M = P (3xk) @ T (kxk) @ Q (kx3), computed in float64, returned row-major 3x3. */
export function composeMatrix(p: Float32Array, t: Float32Array, q: Float32Array, k: number): Float64Array {
  const pt = new Float64Array(3 * k); // P @ T
  for (let row = 0; row < 3; row++) {
    for (let col = 0; col < k; col++) {
      let acc = 0;
      for (let a = 0; a < k; a++) {
        acc += p[row * k + a] * t[a * k + col];
      }
      pt[row * k + col] = acc;
    }
  }
  const m = new Float64Array(9); // (P @ T) @ Q
  for (let row = 0; row < 3; row++) {
    for (let col = 0; col < 3; col++) {
      let acc = 0;
      for (let a = 0; a < k; a++) {
        acc += pt[row * k + a] * q[a * 3 + col];
      }
      m[row * 3 + col] = acc;
    }
  }
  return m;
}

/** y = x @ M for every pixel; writes into out (allocated when omitted). */
export function applyMatrix(
  image: FloatImage,
  m: Float64Array,
  clamp: boolean,
  out?: Float32Array,
): FloatImage {
  const n = image.width * image.height;
  const result = out ?? new Float32Array(n * 3);
  applyMatrixToRows(image.data, 0, n, m, clamp, result);
  return { data: result, height: image.height, width: image.width };
}

/** The tile-sized unit of work: rows [start, end) of the flat pixel array. */
export function applyMatrixToRows(
  pixels: Float32Array,
  start: number,
  end: number,
  m: Float64Array,
  clamp: boolean,
  out: Float32Array,
): void {
  for (let px = start; px < end; px++) {
    const i = px * 3;
    const x0 = pixels[i], x1 = pixels[i + 1], x2 = pixels[i + 2];
    let r = x0 * m[0] + x1 * m[3] + x2 * m[6];
    let g = x0 * m[1] + x1 * m[4] + x2 * m[7];
    let b = x0 * m[2] + x1 * m[5] + x2 * m[8];
    if (clamp) {
      r = r < 0 ? 0 : r > 1 ? 1 : r;
      g = g < 0 ? 0 : g > 1 ? 1 : g;
      b = b < 0 ? 0 : b > 1 ? 1 : b;
    }
    out[i] = r;
    out[i + 1] = g;
    out[i + 2] = b;
  }
}

/** Staged x@P, @T, @Q evaluation (the engine's order); validation reference. */
export function stagedApply(
  image: FloatImage,
  p: Float32Array,
  t: Float32Array,
  q: Float32Array,
  k: number,
  clamp: boolean,
): FloatImage {
  const n = image.width * image.height;
  const out = new Float32Array(n * 3);
  const e1 = new Float64Array(k);
  const e2 = new Float64Array(k);
  for (let px = 0; px < n; px++) {
    const i = px * 3;
    for (let a = 0; a < k; a++) {
      e1[a] = image.data[i] * p[a] + image.data[i + 1] * p[k + a] + image.data[i + 2] * p[2 * k + a];
    }
    for (let b = 0; b < k; b++) {
      let acc = 0;
      for (let a = 0; a < k; a++) {
        acc += e1[a] * t[a * k + b];
      }
      e2[b] = acc;
    }
    for (let c = 0; c < 3; c++) {
      let acc = 0;
      for (let a = 0; a < k; a++) {
        acc += e2[a] * q[a * 3 + c];
      }
      out[i + c] = clamp ? Math.min(Math.max(acc, 0), 1) : acc;
    }
  }
  return { data: out, height: image.height, width: image.width };
}
