/**
 * DOM shell: photo loading, the before/after slider, the preset gallery, and
 * PNG export. Pixel mapping for the loaded photo runs on a small worker pool,
 * one row band per task; session state changes only when a whole result lands.
 */

import { quantize, fromRgba, type FloatImage } from "./image.js";
import {
  FingerprintMismatchError,
  HttpTransport,
  Session,
  type GalleryEntry,
} from "./session.js";
import type { TileJob, TileResult } from "./worker.js";
import type { PresetFile } from "./wire.js";

const SERVER = (window as unknown as { RESTYLE_SERVER?: string }).RESTYLE_SERVER
  ?? "http://127.0.0.1:8080";
const BAND_ROWS = 256; // rows per worker task; keeps peak per-task memory small

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const banner = el<HTMLDivElement>("banner");

function showBanner(message: string, retry?: () => void) {
  banner.textContent = message;
  banner.classList.remove("hidden");
  if (retry) {
    const button = document.createElement("button");
    button.textContent = "retry";
    button.onclick = () => {
      hideBanner();
      retry();
    };
    banner.append(" ", button);
  }
}

function hideBanner() {
  banner.classList.add("hidden");
  banner.textContent = "";
}

class WorkerPool {
  private workers: Worker[] = [];
  private nextWorker = 0;

  constructor(size: number) {
    for (let i = 0; i < size; i++) {
      this.workers.push(new Worker(new URL("./worker.js", import.meta.url), { type: "module" }));
    }
  }

  /** Apply a folded 3x3 matrix band-by-band across the pool. */
  apply(image: FloatImage, matrix: Float64Array, clamp: boolean): Promise<FloatImage> {
    const n = image.width * image.height;
    const out = new Float32Array(n * 3);
    const bands: Array<[number, number]> = [];
    for (let row = 0; row < image.height; row += BAND_ROWS) {
      const start = row * image.width;
      const end = Math.min(row + BAND_ROWS, image.height) * image.width;
      bands.push([start, end]);
    }
    let landed = 0;
    return new Promise((resolve, reject) => {
      bands.forEach(([start, end], band) => {
        const worker = this.workers[this.nextWorker];
        this.nextWorker = (this.nextWorker + 1) % this.workers.length;
        const pixels = image.data.slice(start * 3, end * 3);
        const job: TileJob = {
          pixels: pixels.buffer,
          count: end - start,
          matrix: Array.from(matrix),
          clamp,
          band,
        };
        const onMessage = (event: MessageEvent<TileResult>) => {
          if (event.data.band !== band) return;
          worker.removeEventListener("message", onMessage);
          const mapped = new Float32Array(event.data.mapped);
          out.set(mapped, bands[band][0] * 3);
          landed += 1;
          if (landed === bands.length) {
            resolve({ data: out, width: image.width, height: image.height });
          }
        };
        worker.addEventListener("message", onMessage);
        worker.addEventListener("error", (e) => reject(e), { once: true });
        worker.postMessage(job, [job.pixels]);
      });
    });
  }
}

const pool = new WorkerPool(Math.min(navigator.hardwareConcurrency || 4, 8));
const session = new Session(new HttpTransport(SERVER), pngEncode);

async function pngEncode(rgba: Uint8ClampedArray<ArrayBuffer>, width: number, height: number): Promise<Uint8Array> {
  const canvas = new OffscreenCanvas(width, height);
  const ctx = canvas.getContext("2d")!;
  ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
  const blob = await canvas.convertToBlob({ type: "image/png" });
  return new Uint8Array(await blob.arrayBuffer());
}

async function decodeFile(file: File): Promise<FloatImage> {
  const bitmap = await createImageBitmap(file);
  const canvas = new OffscreenCanvas(bitmap.width, bitmap.height);
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  bitmap.close();
  return fromRgba(data.data, data.width, data.height);
}

function paint(canvas: HTMLCanvasElement, image: FloatImage) {
  canvas.width = image.width;
  canvas.height = image.height;
  const ctx = canvas.getContext("2d")!;
  ctx.putImageData(new ImageData(quantize(image), image.width, image.height), 0, 0);
}

const beforeCanvas = el<HTMLCanvasElement>("before");
const afterCanvas = el<HTMLCanvasElement>("after");
const requestCounter = el<HTMLSpanElement>("request-counter");
let lastResult: FloatImage | null = null;

function refreshCounter() {
  requestCounter.textContent =
    `${session.paramsRequests} params / ${session.projectionRequests} projections requests`;
}

async function onPhotoChosen(file: File) {
  hideBanner();
  let image: FloatImage;
  try {
    image = await decodeFile(file);
  } catch {
    showBanner(`could not decode ${file.name}`);
    return;
  }
  const attempt = async () => {
    try {
      await session.loadImage(image);
      paint(beforeCanvas, image);
      paint(afterCanvas, image);
      lastResult = null;
      el<HTMLDivElement>("editor").classList.remove("hidden");
      refreshCounter();
    } catch (err) {
      showBanner(`server unreachable: ${err}`, () => void attempt());
    }
  };
  await attempt();
}

async function onApplyPreset(preset: PresetFile) {
  if (!session.normalized) {
    showBanner("load a photo first");
    return;
  }
  let matrix: Float64Array;
  try {
    matrix = session.presetMatrix(preset);
  } catch (err) {
    if (err instanceof FingerprintMismatchError) {
      showBanner(`preset does not match the current model: ${err.message}`);
      return;
    }
    throw err;
  }
  const result = await pool.apply(session.normalized, matrix, true);
  session.activePreset = preset;
  lastResult = result;
  paint(afterCanvas, result);
  refreshCounter();
}

function addGalleryChip(entry: GalleryEntry) {
  const chip = document.createElement("div");
  chip.className = "chip";
  const apply = document.createElement("button");
  apply.textContent = entry.label;
  apply.onclick = () => void onApplyPreset(entry.preset);
  const save = document.createElement("button");
  save.textContent = "↓";
  save.title = "export preset file";
  save.onclick = () => {
    const bytes = session.exportPreset(entry.preset);
    download(new Blob([bytes as unknown as BlobPart]), `${entry.label}.npre`);
  };
  chip.append(apply, save);
  el<HTMLDivElement>("gallery").append(chip);
}

function download(blob: Blob, name: string) {
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = name;
  link.click();
  URL.revokeObjectURL(link.href);
}

el<HTMLInputElement>("photo-input").addEventListener("change", (e) => {
  const file = (e.target as HTMLInputElement).files?.[0];
  if (file) void onPhotoChosen(file);
});

el<HTMLInputElement>("style-input").addEventListener("change", async (e) => {
  const file = (e.target as HTMLInputElement).files?.[0];
  if (!file) return;
  hideBanner();
  try {
    const image = await decodeFile(file);
    const entry = await session.extractStyle(image, file.name.replace(/\.[^.]*$/, ""));
    addGalleryChip(entry);
    refreshCounter();
  } catch (err) {
    showBanner(`style extraction failed: ${err}`);
  }
});

el<HTMLInputElement>("preset-input").addEventListener("change", async (e) => {
  const file = (e.target as HTMLInputElement).files?.[0];
  if (!file) return;
  hideBanner();
  try {
    const bytes = new Uint8Array(await file.arrayBuffer());
    addGalleryChip(session.importPreset(bytes));
  } catch (err) {
    showBanner(`could not read preset: ${err}`);
  }
});

el<HTMLInputElement>("slider").addEventListener("input", (e) => {
  const pct = Number((e.target as HTMLInputElement).value);
  afterCanvas.style.clipPath = `inset(0 ${100 - pct}% 0 0)`;
});

el<HTMLButtonElement>("export-button").addEventListener("click", () => {
  if (!lastResult) {
    showBanner("apply a preset first");
    return;
  }
  const canvas = document.createElement("canvas");
  canvas.width = lastResult.width;
  canvas.height = lastResult.height;
  canvas.getContext("2d")!
    .putImageData(new ImageData(quantize(lastResult), lastResult.width, lastResult.height), 0, 0);
  canvas.toBlob((blob) => {
    if (blob) download(blob, "restyled.png");
  }, "image/png");
});

refreshCounter();
