/** Fixture loading for node tests: raw engine-generated binaries. */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
const here = dirname(fileURLToPath(import.meta.url));
// compiled location is dist-test/test/, sources sit two levels up
export const FIXTURES = join(here, "..", "..", "test", "fixtures");
export function fixtureBytes(name) {
    return new Uint8Array(readFileSync(join(FIXTURES, name)));
}
export function readImgf(name) {
    const bytes = fixtureBytes(name);
    const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
    if (new TextDecoder().decode(bytes.subarray(0, 4)) !== "IMGF") {
        throw new Error("bad IMGF fixture");
    }
    const height = view.getUint32(4, true);
    const width = view.getUint32(8, true);
    const data = new Float32Array(height * width * 3);
    for (let i = 0; i < data.length; i++) {
        data[i] = view.getFloat32(12 + 4 * i, true);
    }
    return { data, height, width };
}
export function readImgu(name) {
    const bytes = fixtureBytes(name);
    const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
    if (new TextDecoder().decode(bytes.subarray(0, 4)) !== "IMGU") {
        throw new Error("bad IMGU fixture");
    }
    const height = view.getUint32(4, true);
    const width = view.getUint32(8, true);
    return { data: bytes.slice(12), height, width };
}
