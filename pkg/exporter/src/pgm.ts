/**
 * Netpbm raster decoding: binary/ascii grayscale (P5/P2) and binary RGB
 * (P6, reduced to channel-mean gray). 8-bit maxval only; enough for the
 * synthetic datasets and mask rasters this tool is pointed at.
 */

import { readFileSync, writeFileSync } from 'fs';

export interface GrayImage {
  width: number;
  height: number;
  /** row-major 8-bit intensities */
  pixels: Uint8Array;
}

function parseHeader(buf: Buffer): { fields: number[]; magic: string; offset: number } {
  const magic = buf.subarray(0, 2).toString('ascii');
  const fields: number[] = [];
  let i = 2;
  let current = '';
  let inComment = false;
  while (i < buf.length && fields.length < 3) {
    const ch = String.fromCharCode(buf[i]);
    i += 1;
    if (inComment) {
      if (ch === '\n') inComment = false;
      continue;
    }
    if (ch === '#') {
      inComment = true;
      continue;
    }
    if (/\s/.test(ch)) {
      if (current.length) {
        fields.push(parseInt(current, 10));
        current = '';
      }
      continue;
    }
    if (!/[0-9]/.test(ch)) throw new Error(`unexpected ${JSON.stringify(ch)} in header`);
    current += ch;
  }
  return { fields, magic, offset: i };
}

export function decodePgm(buf: Buffer): GrayImage {
  const { fields, magic, offset } = parseHeader(buf);
  const [width, height, maxval] = fields;
  if (!width || !height || !maxval) throw new Error('truncated netpbm header');
  if (maxval > 255) throw new Error(`unsupported maxval ${maxval}`);

  const n = width * height;
  const pixels = new Uint8Array(n);
  if (magic === 'P5') {
    if (buf.length < offset + n) throw new Error('truncated P5 payload');
    pixels.set(buf.subarray(offset, offset + n));
  } else if (magic === 'P6') {
    if (buf.length < offset + 3 * n) throw new Error('truncated P6 payload');
    for (let i = 0; i < n; i++) {
      const o = offset + 3 * i;
      pixels[i] = Math.round((buf[o] + buf[o + 1] + buf[o + 2]) / 3);
    }
  } else if (magic === 'P2') {
    const text = buf.subarray(offset).toString('ascii');
    const values = text.split(/\s+/).filter((t) => t.length).map((t) => parseInt(t, 10));
    if (values.length < n) throw new Error('truncated P2 payload');
    pixels.set(values.slice(0, n));
  } else {
    throw new Error(`unsupported netpbm magic ${magic}`);
  }
  return { width, height, pixels };
}

export function readImage(path: string): GrayImage {
  return decodePgm(readFileSync(path));
}

export function writePgm(path: string, image: GrayImage): void {
  const header = Buffer.from(`P5\n${image.width} ${image.height}\n255\n`, 'ascii');
  writeFileSync(path, Buffer.concat([header, Buffer.from(image.pixels)]));
}
