import assert from "node:assert/strict";
import { test } from "node:test";
import { applyMatrix, composeMatrix, stagedApply } from "../src/colormap.js";
import { decodeParams, decodePreset, decodeProjections } from "../src/wire.js";
import { fixtureBytes, readImgf, readImgu } from "./fixtures.js";
function randomArray(n, seed) {
    // small deterministic LCG; plenty for test data
    let state = seed >>> 0;
    const out = new Float32Array(n);
    for (let i = 0; i < n; i++) {
        state = (state * 1664525 + 1013904223) >>> 0;
        out[i] = (state / 2 ** 32) * 2 - 1;
    }
    return out;
}
test("precomposed 3x3 matches staged evaluation within 1e-5", () => {
    const k = 16;
    const p = randomArray(3 * k, 1);
    const t = randomArray(k * k, 2);
    const q = randomArray(k * 3, 3);
    const pixels = randomArray(40 * 3, 4).map((v) => (v + 1) / 2);
    const image = { data: Float32Array.from(pixels), height: 5, width: 8 };
    const staged = stagedApply(image, p, t, q, k, false);
    const folded = applyMatrix(image, composeMatrix(p, t, q, k), false);
    let worst = 0;
    for (let i = 0; i < staged.data.length; i++) {
        worst = Math.max(worst, Math.abs(staged.data[i] - folded.data[i]));
    }
    assert.ok(worst <= 1e-5, `max deviation ${worst}`);
});
test("identity projections with identity matrix leave pixels untouched", () => {
    const k = 4;
    const p = new Float32Array([1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0]);
    const q = new Float32Array([1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
    const t = new Float32Array(16);
    for (let i = 0; i < 4; i++)
        t[i * 4 + i] = 1;
    const image = { data: new Float32Array([0.1, 0.5, 0.9]), height: 1, width: 1 };
    const out = applyMatrix(image, composeMatrix(p, t, q, 4), true);
    assert.deepEqual(Array.from(out.data), [0.10000000149011612, 0.5, 0.8999999761581421]);
});
test("normalization with served parameters matches the engine's intermediate", () => {
    const content = readImgf("content_raw.imgf");
    const engineZ = readImgf("normalized.imgf");
    const params = decodeParams(fixtureBytes("params.bin"));
    const proj = decodeProjections(fixtureBytes("projections.bin"));
    const mN = composeMatrix(proj.pN, params.d, proj.qN, params.k);
    const z = applyMatrix(content, mN, false);
    let worst = 0;
    for (let i = 0; i < z.data.length; i++) {
        worst = Math.max(worst, Math.abs(z.data[i] - engineZ.data[i]));
    }
    // folded 3x3 vs the engine's staged float32 path
    assert.ok(worst <= 1e-5, `max deviation ${worst}`);
});
test("client preset application matches the engine output within 2/255", () => {
    const content = readImgf("content_raw.imgf");
    const params = decodeParams(fixtureBytes("params.bin"));
    const proj = decodeProjections(fixtureBytes("projections.bin"));
    const preset = decodePreset(fixtureBytes("preset.npre"));
    const expected = readImgu("styled_expected.imgu");
    const mN = composeMatrix(proj.pN, params.d, proj.qN, params.k);
    const z = applyMatrix(content, mN, false);
    const mS = composeMatrix(proj.pS, preset.matrix, proj.qS, preset.k);
    const styled = applyMatrix(z, mS, true);
    let worst = 0;
    for (let i = 0; i < styled.data.length; i++) {
        const v = Math.min(Math.max(styled.data[i], 0), 1);
        const byte = Math.floor(v * 255 + 0.5);
        worst = Math.max(worst, Math.abs(byte - expected.data[i]));
    }
    assert.ok(worst <= 2, `max byte deviation ${worst}`);
});
