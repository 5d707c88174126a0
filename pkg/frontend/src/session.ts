/**
 * Client session: one loaded photo, one cached normalized image, many presets.
 *
 * Network discipline is the whole point: loading a photo ships exactly one
 * thumbnail and pulls the matrix bundle (plus the projections once per model
 * fingerprint); every preset application afterwards is pure local pixel work
 * on the cached normalized image. Full-resolution pixels never leave the page.
 */

import { composeMatrix, applyMatrix } from "./colormap.js";
import { downsample, quantize, type FloatImage } from "./image.js";
import {
  decodeParams,
  decodePreset,
  decodeProjections,
  encodePreset,
  fingerprintsEqual,
  fingerprintHex,
  type ParamsResponse,
  type PresetFile,
  type ProjectionsResponse,
} from "./wire.js";

export interface Transport {
  /** POST a PNG thumbnail, receive the params body. */
  params(thumbnailPng: Uint8Array): Promise<Uint8Array>;
  /** GET the projections body. */
  projections(): Promise<Uint8Array>;
}

/** PNG-encodes quantized RGBA pixels; the browser backs this with a canvas. */
export type PngEncoder = (
  rgba: Uint8ClampedArray<ArrayBuffer>,
  width: number,
  height: number,
) => Promise<Uint8Array>;

export class FingerprintMismatchError extends Error {}
export class NoImageError extends Error {}

export interface GalleryEntry {
  preset: PresetFile;
  label: string;
}

export class HttpTransport implements Transport {
  constructor(private baseUrl: string) {}

  async params(thumbnailPng: Uint8Array): Promise<Uint8Array> {
    const resp = await fetch(`${this.baseUrl}/v1/params`, {
      method: "POST",
      headers: { "Content-Type": "application/octet-stream" },
      body: thumbnailPng as unknown as BodyInit,
    });
    if (!resp.ok) {
      throw new Error(`params request failed: ${resp.status} ${await resp.text()}`);
    }
    return new Uint8Array(await resp.arrayBuffer());
  }

  async projections(): Promise<Uint8Array> {
    const resp = await fetch(`${this.baseUrl}/v1/projections`);
    if (!resp.ok) {
      throw new Error(`projections request failed: ${resp.status}`);
    }
    return new Uint8Array(await resp.arrayBuffer());
  }
}

export class Session {
  image: FloatImage | null = null;
  normalized: FloatImage | null = null;
  params: ParamsResponse | null = null;
  projections: ProjectionsResponse | null = null;
  gallery: GalleryEntry[] = [];
  activePreset: PresetFile | null = null;
  paramsRequests = 0;
  projectionRequests = 0;

  constructor(
    private transport: Transport,
    private encodePng: PngEncoder,
    private thumbnailSide = 256,
  ) {}

  get fingerprint(): Uint8Array | null {
    return this.params?.fingerprint ?? null;
  }

  private async fetchParamsFor(image: FloatImage): Promise<ParamsResponse> {
    const side = Math.min(this.thumbnailSide, Math.max(image.width, image.height));
    const thumb = downsample(image, side);
    const png = await this.encodePng(quantize(thumb), thumb.width, thumb.height);
    this.paramsRequests += 1;
    return decodeParams(await this.transport.params(png));
  }

  private async ensureProjections(fingerprint: Uint8Array): Promise<ProjectionsResponse> {
    if (this.projections && fingerprintsEqual(this.projections.fingerprint, fingerprint)) {
      return this.projections;
    }
    this.projectionRequests += 1;
    const projections = decodeProjections(await this.transport.projections());
    if (!fingerprintsEqual(projections.fingerprint, fingerprint)) {
      throw new FingerprintMismatchError(
        "server model changed between the params and projections responses",
      );
    }
    this.projections = projections;
    return projections;
  }

  /** Decode, upload the thumbnail, and cache the normalized image. */
  async loadImage(image: FloatImage): Promise<void> {
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
  presetMatrix(preset: PresetFile): Float64Array {
    if (!this.normalized || !this.params || !this.projections) {
      throw new NoImageError("load an image before applying presets");
    }
    if (preset.role !== "s") {
      throw new FingerprintMismatchError("preset does not hold a stylizing matrix");
    }
    if (!fingerprintsEqual(preset.fingerprint, this.params.fingerprint)) {
      throw new FingerprintMismatchError(
        `preset belongs to model ${fingerprintHex(preset.fingerprint)}, ` +
        `session is bound to ${fingerprintHex(this.params.fingerprint)}`,
      );
    }
    return composeMatrix(this.projections.pS, preset.matrix, this.projections.qS, preset.k);
  }

  /** Local-only: map the cached normalized image through a preset matrix. */
  applyPreset(preset: PresetFile): FloatImage {
    const mS = this.presetMatrix(preset);
    this.activePreset = preset;
    return applyMatrix(this.normalized!, mS, true);
  }

  /** Upload a style image's thumbnail; keep its stylizing matrix as a preset. */
  async extractStyle(image: FloatImage, name: string): Promise<GalleryEntry> {
    const params = await this.fetchParamsFor(image);
    const preset: PresetFile = {
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

  exportPreset(preset: PresetFile): Uint8Array {
    return encodePreset(preset);
  }

  importPreset(bytes: Uint8Array, label?: string): GalleryEntry {
    const preset = decodePreset(bytes);
    const entry = { preset, label: label ?? (preset.name || "imported") };
    this.gallery.push(entry);
    return entry;
  }
}
