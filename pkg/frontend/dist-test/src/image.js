/** Float RGB images plus the exact box-average downsampling rule the engine uses. */
export function fromRgba(rgba, width, height) {
    const data = new Float32Array(width * height * 3);
    for (let px = 0; px < width * height; px++) {
        data[px * 3] = rgba[px * 4] / 255;
        data[px * 3 + 1] = rgba[px * 4 + 1] / 255;
        data[px * 3 + 2] = rgba[px * 4 + 2] / 255;
    }
    return { data, height, width };
}
/** Quantize like the engine does on export: clamp, then round half away from zero. */
export function quantize(image) {
    const out = new Uint8ClampedArray(image.width * image.height * 4);
    for (let px = 0; px < image.width * image.height; px++) {
        for (let c = 0; c < 3; c++) {
            const v = Math.min(Math.max(image.data[px * 3 + c], 0), 1);
            out[px * 4 + c] = Math.floor(v * 255 + 0.5);
        }
        out[px * 4 + 3] = 255;
    }
    return out;
}
/** Fractional coverage weights of destination cell i over source cells, rows sum to 1. */
function boxWeights(src, dst) {
    const rows = [];
    const scale = src / dst;
    for (let i = 0; i < dst; i++) {
        const start = i * scale;
        const end = (i + 1) * scale;
        const lo = Math.floor(start);
        const hi = Math.min(Math.ceil(end), src);
        const entries = [];
        let total = 0;
        for (let s = lo; s < hi; s++) {
            const cover = Math.min(end, s + 1) - Math.max(start, s);
            if (cover > 0) {
                entries.push([s, cover]);
                total += cover;
            }
        }
        rows.push(entries.map(([s, w]) => [s, w / total]));
    }
    return rows;
}
/**
 * Area-average onto a side x side grid over exact fractional footprints.
 * Matches the engine's rule so the server sees the same thumbnail bytes the
 * engine itself would build.
 */
export function downsample(image, side) {
    const rowW = boxWeights(image.height, side);
    const colW = boxWeights(image.width, side);
    // contract rows first (into side x width), then columns
    const mid = new Float64Array(side * image.width * 3);
    for (let i = 0; i < side; i++) {
        for (const [srcRow, w] of rowW[i]) {
            const rowBase = srcRow * image.width * 3;
            const midBase = i * image.width * 3;
            for (let x = 0; x < image.width * 3; x++) {
                mid[midBase + x] += w * image.data[rowBase + x];
            }
        }
    }
    const out = new Float32Array(side * side * 3);
    for (let i = 0; i < side; i++) {
        for (let j = 0; j < side; j++) {
            let r = 0, g = 0, b = 0;
            for (const [srcCol, w] of colW[j]) {
                const base = i * image.width * 3 + srcCol * 3;
                r += w * mid[base];
                g += w * mid[base + 1];
                b += w * mid[base + 2];
            }
            const o = (i * side + j) * 3;
            out[o] = r;
            out[o + 1] = g;
            out[o + 2] = b;
        }
    }
    return { data: out, height: side, width: side };
}
