/// <reference lib="webworker" />
/**
 * Tile worker: applies a folded 3x3 color matrix to a band of pixel rows.
 * Buffers travel as transferables, so full-resolution work never blocks the
 * UI thread and never copies.
 */

import { applyMatrixToRows } from "./colormap.js";

export interface TileJob {
  pixels: ArrayBuffer;   // n*3 float32
  count: number;         // pixels in this band
  matrix: number[];      // 9 entries row-major
  clamp: boolean;
  band: number;          // caller's reassembly index
}

export interface TileResult {
  mapped: ArrayBuffer;
  band: number;
}

self.onmessage = (event: MessageEvent<TileJob>) => {
  const { pixels, count, matrix, clamp, band } = event.data;
  const src = new Float32Array(pixels);
  const out = new Float32Array(count * 3);
  applyMatrixToRows(src, 0, count, Float64Array.from(matrix), clamp, out);
  const result: TileResult = { mapped: out.buffer, band };
  (self as unknown as Worker).postMessage(result, [out.buffer]);
};
