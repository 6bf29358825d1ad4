// Binary PGM (P5) parsing for smoke density frames.

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

export function parsePgm(bytes: Uint8Array): GrayImage {
  if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (P5) payload");
  }
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    if (bytes[pos] === 0x23) { // '#' comment
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      continue;
    }
    let token = "";
    while (pos < bytes.length && !isSpace(bytes[pos])) {
      token += String.fromCharCode(bytes[pos++]);
    }
    if (!token) throw new Error("PGM header ended early");
    fields.push(parseInt(token, 10));
  }
  pos++; // single whitespace before the raster
  const [width, height, maxval] = fields;
  if (maxval !== 255) throw new Error(`unsupported PGM maxval ${maxval}`);
  const raster = bytes.subarray(pos, pos + width * height);
  if (raster.length !== width * height) throw new Error("PGM raster truncated");
  return { width, height, pixels: new Uint8Array(raster) };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export function toImageData(image: GrayImage): ImageData {
  const rgba = new Uint8ClampedArray(image.width * image.height * 4);
  for (let k = 0; k < image.pixels.length; k++) {
    const value = image.pixels[k];
    rgba[4 * k] = value;
    rgba[4 * k + 1] = value;
    rgba[4 * k + 2] = value;
    rgba[4 * k + 3] = 255;
  }
  return new ImageData(rgba, image.width, image.height);
}
