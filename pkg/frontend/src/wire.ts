/**
 * Binary wire formats shared with the engine, all little-endian:
 *
 *   params body      "NPPR" | version u8 | k u16 | fingerprint 8B | d k*k f32 | r k*k f32
 *   projections body "NPPJ" | version u8 | k u16 | fingerprint 8B | Pn 3k | Qn 3k | Ps 3k | Qs 3k
 *   preset file      "NPRE" | version u8 | role u8 | k u16 | fingerprint 8B |
 *                    k*k f32 | name len u16 | name UTF-8 | created u64
 *
 * Byte-exactness with the engine matters: presets exported here must load in
 * the engine CLI unchanged, and vice versa.
 */

export interface ParamsResponse {
  version: number;
  k: number;
  fingerprint: Uint8Array;
  d: Float32Array;
  r: Float32Array;
}

export interface ProjectionsResponse {
  version: number;
  k: number;
  fingerprint: Uint8Array;
  pN: Float32Array; // 3 x k row-major
  qN: Float32Array; // k x 3 row-major
  pS: Float32Array;
  qS: Float32Array;
}

export interface PresetFile {
  role: "n" | "s";
  k: number;
  fingerprint: Uint8Array;
  matrix: Float32Array; // k x k row-major
  name: string;
  created: bigint; // unix seconds
}

export class WireFormatError extends Error {}

class Reader {
  private view: DataView;
  private pos = 0;

  constructor(private bytes: Uint8Array) {
    this.view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  }

  magic(expected: string): void {
    const got = new TextDecoder().decode(this.take(4));
    if (got !== expected) {
      throw new WireFormatError(`bad magic: expected ${expected}, got ${got}`);
    }
  }

  take(n: number): Uint8Array {
    if (this.pos + n > this.bytes.length) {
      throw new WireFormatError("truncated payload");
    }
    const out = this.bytes.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  private need(n: number): void {
    if (this.pos + n > this.bytes.length) {
      throw new WireFormatError("truncated payload");
    }
  }

  u8(): number {
    return this.take(1)[0];
  }

  u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.pos, true);
    this.pos += 2;
    return v;
  }

  u64(): bigint {
    this.need(8);
    const v = this.view.getBigUint64(this.pos, true);
    this.pos += 8;
    return v;
  }

  f32Array(count: number): Float32Array {
    this.need(4 * count);
    const out = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.view.getFloat32(this.pos, true);
      this.pos += 4;
    }
    return out;
  }

  done(): void {
    if (this.pos !== this.bytes.length) {
      throw new WireFormatError(`${this.bytes.length - this.pos} trailing bytes`);
    }
  }
}

export function decodeParams(bytes: Uint8Array): ParamsResponse {
  const r = new Reader(bytes);
  r.magic("NPPR");
  const version = r.u8();
  const k = r.u16();
  const fingerprint = r.take(8).slice();
  const d = r.f32Array(k * k);
  const rr = r.f32Array(k * k);
  r.done();
  return { version, k, fingerprint, d, r: rr };
}

export function decodeProjections(bytes: Uint8Array): ProjectionsResponse {
  const r = new Reader(bytes);
  r.magic("NPPJ");
  const version = r.u8();
  const k = r.u16();
  const fingerprint = r.take(8).slice();
  const pN = r.f32Array(3 * k);
  const qN = r.f32Array(k * 3);
  const pS = r.f32Array(3 * k);
  const qS = r.f32Array(k * 3);
  r.done();
  return { version, k, fingerprint, pN, qN, pS, qS };
}

export function decodePreset(bytes: Uint8Array): PresetFile {
  const r = new Reader(bytes);
  r.magic("NPRE");
  const version = r.u8();
  if (version !== 1) {
    throw new WireFormatError(`unsupported preset version ${version}`);
  }
  const role = String.fromCharCode(r.u8());
  if (role !== "n" && role !== "s") {
    throw new WireFormatError(`unknown preset role ${role}`);
  }
  const k = r.u16();
  const fingerprint = r.take(8).slice();
  const matrix = r.f32Array(k * k);
  const nameLen = r.u16();
  const name = new TextDecoder().decode(r.take(nameLen));
  const created = r.u64();
  r.done();
  return { role, k, fingerprint, matrix, name, created };
}

export function encodePreset(preset: PresetFile): Uint8Array {
  const nameBytes = new TextEncoder().encode(preset.name);
  const total = 4 + 1 + 1 + 2 + 8 + preset.matrix.length * 4 + 2 + nameBytes.length + 8;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  out.set(new TextEncoder().encode("NPRE"), 0);
  out[4] = 1;
  out[5] = preset.role.charCodeAt(0);
  view.setUint16(6, preset.k, true);
  out.set(preset.fingerprint, 8);
  let pos = 16;
  for (let i = 0; i < preset.matrix.length; i++) {
    view.setFloat32(pos, preset.matrix[i], true);
    pos += 4;
  }
  view.setUint16(pos, nameBytes.length, true);
  pos += 2;
  out.set(nameBytes, pos);
  pos += nameBytes.length;
  view.setBigUint64(pos, preset.created, true);
  return out;
}

export function fingerprintsEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i] !== b[i]) return false;
  }
  return true;
}

export function fingerprintHex(fp: Uint8Array): string {
  return Array.from(fp, (b) => b.toString(16).padStart(2, "0")).join("");
}
