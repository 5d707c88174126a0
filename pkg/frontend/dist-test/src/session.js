/**
 * Client session: one loaded photo, one cached normalized image, many presets.
 *
 * Network discipline is the whole point: loading a photo ships exactly one
 * thumbnail and pulls the matrix bundle (plus the projections once per model
 * fingerprint); every preset application afterwards is pure local pixel work
 * on the cached normalized image. Full-resolution pixels never leave the page.
 */
import { composeMatrix, applyMatrix } from "./colormap.js";
import { downsample, quantize } from "./image.js";
import { decodeParams, decodePreset, decodeProjections, encodePreset, fingerprintsEqual, fingerprintHex, } from "./wire.js";
export class FingerprintMismatchError extends Error {
}
export class NoImageError extends Error {
}
export class HttpTransport {
    baseUrl;
    constructor(baseUrl) {
        this.baseUrl = baseUrl;
    }
    async params(thumbnailPng) {
        const resp = await fetch(`${this.baseUrl}/v1/params`, {
            method: "POST",
            headers: { "Content-Type": "application/octet-stream" },
            body: thumbnailPng,
        });
        if (!resp.ok) {
            throw new Error(`params request failed: ${resp.status} ${await resp.text()}`);
        }
        return new Uint8Array(await resp.arrayBuffer());
    }
    async projections() {
        const resp = await fetch(`${this.baseUrl}/v1/projections`);
        if (!resp.ok) {
            throw new Error(`projections request failed: ${resp.status}`);
        }
        return new Uint8Array(await resp.arrayBuffer());
    }
}
export class Session {
    transport;
    encodePng;
    thumbnailSide;
    image = null;
    normalized = null;
    params = null;
    projections = null;
    gallery = [];
    activePreset = null;
    paramsRequests = 0;
    projectionRequests = 0;
    constructor(transport, encodePng, thumbnailSide = 256) {
        this.transport = transport;
        this.encodePng = encodePng;
        this.thumbnailSide = thumbnailSide;
    }
    get fingerprint() {
        return this.params?.fingerprint ?? null;
    }
    async fetchParamsFor(image) {
        const side = Math.min(this.thumbnailSide, Math.max(image.width, image.height));
        const thumb = downsample(image, side);
        const png = await this.encodePng(quantize(thumb), thumb.width, thumb.height);
        this.paramsRequests += 1;
        return decodeParams(await this.transport.params(png));
    }
    async ensureProjections(fingerprint) {
        if (this.projections && fingerprintsEqual(this.projections.fingerprint, fingerprint)) {
            return this.projections;
        }
        this.projectionRequests += 1;
        const projections = decodeProjections(await this.transport.projections());
        if (!fingerprintsEqual(projections.fingerprint, fingerprint)) {
            throw new FingerprintMismatchError("server model changed between the params and projections responses");
        }
        this.projections = projections;
        return projections;
    }
    /** Decode, upload the thumbnail, and cache the normalized image. */
    async loadImage(image) {
        const params = await this.fetchParamsFor(image);
        const projections = await this.ensureProjections(params.fingerprint);
        const mN = composeMatrix(projections.pN, params.d, projections.qN, params.k);
        // never reuse a stale cache: the normalized image is bound to this exchange
        this.normalized = applyMatrix(image, mN, false);
        this.image = image;
        this.params = params;
        this.activePreset = null;
    }
    /** Validate a preset against this session and fold it to its 3x3 matrix. */
    presetMatrix(preset) {
        if (!this.normalized || !this.params || !this.projections) {
            throw new NoImageError("load an image before applying presets");
        }
        if (preset.role !== "s") {
            throw new FingerprintMismatchError("preset does not hold a stylizing matrix");
        }
        if (!fingerprintsEqual(preset.fingerprint, this.params.fingerprint)) {
            throw new FingerprintMismatchError(`preset belongs to model ${fingerprintHex(preset.fingerprint)}, ` +
                `session is bound to ${fingerprintHex(this.params.fingerprint)}`);
        }
        return composeMatrix(this.projections.pS, preset.matrix, this.projections.qS, preset.k);
    }
    /** Local-only: map the cached normalized image through a preset matrix. */
    applyPreset(preset) {
        const mS = this.presetMatrix(preset);
        this.activePreset = preset;
        return applyMatrix(this.normalized, mS, true);
    }
    /** Upload a style image's thumbnail; keep its stylizing matrix as a preset. */
    async extractStyle(image, name) {
        const params = await this.fetchParamsFor(image);
        const preset = {
            role: "s",
            k: params.k,
            fingerprint: params.fingerprint,
            matrix: params.r,
            name,
            created: BigInt(Math.floor(Date.now() / 1000)),
        };
        const entry = { preset, label: name };
        this.gallery.push(entry);
        return entry;
    }
    exportPreset(preset) {
        return encodePreset(preset);
    }
    importPreset(bytes, label) {
        const preset = decodePreset(bytes);
        const entry = { preset, label: label ?? (preset.name || "imported") };
        this.gallery.push(entry);
        return entry;
    }
}
