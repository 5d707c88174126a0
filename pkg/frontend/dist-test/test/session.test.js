import assert from "node:assert/strict";
import { test } from "node:test";
import { FingerprintMismatchError, Session } from "../src/session.js";
import { decodePreset } from "../src/wire.js";
import { fixtureBytes, readImgf } from "./fixtures.js";
/** Serves the engine-generated fixture bytes and counts round trips. */
class FixtureTransport {
    paramsCalls = 0;
    projectionCalls = 0;
    nextParams = "params.bin";
    async params(_thumbnailPng) {
        this.paramsCalls += 1;
        return fixtureBytes(this.nextParams);
    }
    async projections() {
        this.projectionCalls += 1;
        return fixtureBytes("projections.bin");
    }
}
const fakePngEncoder = async (rgba, width, height) => {
    // tests never decode this; a tag is enough to stand in for a PNG body
    return new Uint8Array([width & 0xff, height & 0xff, rgba[0]]);
};
function makeSession() {
    const transport = new FixtureTransport();
    const session = new Session(transport, fakePngEncoder, 64);
    return { transport, session };
}
test("loading an image costs exactly one params request", async () => {
    const { transport, session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    assert.equal(transport.paramsCalls, 1);
    assert.equal(transport.projectionCalls, 1);
    assert.ok(session.normalized !== null);
});
test("applying five presets triggers zero network traffic", async () => {
    const { transport, session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    const preset = decodePreset(fixtureBytes("preset.npre"));
    for (let i = 0; i < 5; i++) {
        const out = session.applyPreset(preset);
        assert.equal(out.data.length, session.normalized.data.length);
    }
    assert.equal(transport.paramsCalls, 1);
    assert.equal(transport.projectionCalls, 1);
});
test("preset application clamps output to [0,1]", async () => {
    const { session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    const out = session.applyPreset(decodePreset(fixtureBytes("preset.npre")));
    for (const v of out.data) {
        assert.ok(v >= 0 && v <= 1);
    }
});
test("foreign-fingerprint presets are rejected", async () => {
    const { session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    const preset = decodePreset(fixtureBytes("preset.npre"));
    const foreign = { ...preset, fingerprint: new Uint8Array(8) };
    assert.throws(() => session.applyPreset(foreign), FingerprintMismatchError);
});
test("preset application before any image load is rejected", () => {
    const { session } = makeSession();
    const preset = decodePreset(fixtureBytes("preset.npre"));
    assert.throws(() => session.applyPreset(preset));
});
test("reloading an image refreshes the cached normalized version", async () => {
    const { transport, session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    const first = session.normalized;
    await session.loadImage(readImgf("content_raw.imgf"));
    assert.equal(transport.paramsCalls, 2);
    assert.notEqual(session.normalized, first); // no stale cache reuse
});
test("style extraction yields an exportable preset bound to the model", async () => {
    const { transport, session } = makeSession();
    await session.loadImage(readImgf("content_raw.imgf"));
    transport.nextParams = "style_params.bin";
    const entry = await session.extractStyle(readImgf("style_raw.imgf"), "mystyle");
    assert.equal(entry.preset.role, "s");
    assert.equal(entry.preset.name, "mystyle");
    const exported = session.exportPreset(entry.preset);
    const back = decodePreset(exported);
    assert.deepEqual(Array.from(back.matrix), Array.from(entry.preset.matrix));
    // the extracted style is usable right away on the cached normalized image
    const out = session.applyPreset(entry.preset);
    assert.equal(out.height, session.image.height);
});
test("imported preset files join the gallery", () => {
    const { session } = makeSession();
    const entry = session.importPreset(fixtureBytes("preset.npre"));
    assert.equal(entry.preset.name, "fixture-style");
    assert.equal(session.gallery.length, 1);
});
