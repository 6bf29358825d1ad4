// Binary vector-field payloads (.vf2): decode, re-encode, and sample.
// Layout: "VF2D", u32 version=1, u32 width, u32 height (little-endian),
// then width*height*2 float32 (u, v) pairs, row-major from the top-left.

export interface Field {
  width: number;
  height: number;
  /** interleaved (u, v), length width * height * 2 */
  data: Float32Array;
}

const HEADER_BYTES = 16;
const MAGIC = "VF2D";

export function decodeField(bytes: Uint8Array): Field {
  if (bytes.length < HEADER_BYTES) {
    throw new Error("field payload shorter than header");
  }
  const magic = String.fromCharCode(...bytes.subarray(0, 4));
  if (magic !== MAGIC) {
    throw new Error(`bad field magic ${magic}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const version = view.getUint32(4, true);
  if (version !== 1) {
    throw new Error(`unsupported field version ${version}`);
  }
  const width = view.getUint32(8, true);
  const height = view.getUint32(12, true);
  const expected = HEADER_BYTES + width * height * 8;
  if (bytes.length !== expected) {
    throw new Error(`field payload has ${bytes.length} bytes, expected ${expected}`);
  }
  const data = new Float32Array(width * height * 2);
  for (let k = 0; k < data.length; k++) {
    data[k] = view.getFloat32(HEADER_BYTES + 4 * k, true);
  }
  return { width, height, data };
}

export function encodeField(field: Field): Uint8Array {
  const bytes = new Uint8Array(HEADER_BYTES + field.data.length * 4);
  const view = new DataView(bytes.buffer);
  for (let i = 0; i < 4; i++) {
    bytes[i] = MAGIC.charCodeAt(i);
  }
  view.setUint32(4, 1, true);
  view.setUint32(8, field.width, true);
  view.setUint32(12, field.height, true);
  for (let k = 0; k < field.data.length; k++) {
    view.setFloat32(HEADER_BYTES + 4 * k, field.data[k], true);
  }
  return bytes;
}

export function sampleVector(field: Field, x: number, y: number): [number, number] {
  const k = 2 * (y * field.width + x);
  return [field.data[k], field.data[k + 1]];
}

export function maxMagnitude(field: Field): number {
  let best = 0;
  for (let k = 0; k < field.data.length; k += 2) {
    const m = Math.hypot(field.data[k], field.data[k + 1]);
    if (m > best) best = m;
  }
  return best;
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return bytes;
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}
