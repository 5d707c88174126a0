/// <reference lib="webworker" />
/**
 * Tile worker: applies a folded 3x3 color matrix to a band of pixel rows.
 * Buffers travel as transferables, so full-resolution work never blocks the
 * UI thread and never copies.
 */
import { applyMatrixToRows } from "./colormap.js";
self.onmessage = (event) => {
    const { pixels, count, matrix, clamp, band } = event.data;
    const src = new Float32Array(pixels);
    const out = new Float32Array(count * 3);
    applyMatrixToRows(src, 0, count, Float64Array.from(matrix), clamp, out);
    const result = { mapped: out.buffer, band };
    self.postMessage(result, [out.buffer]);
};
