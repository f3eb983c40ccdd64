import { mkdtempSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { decodePgm, readImage, writePgm } from './pgm.js';

describe('netpbm decoding', () => {
  it('round-trips P5', () => {
    const dir = mkdtempSync(join(tmpdir(), 'pgm-'));
    const path = join(dir, 'x.pgm');
    const pixels = new Uint8Array([0, 10, 20, 30, 40, 50]);
    writePgm(path, { width: 3, height: 2, pixels });
    const back = readImage(path);
    expect(back.width).toBe(3);
    expect(back.height).toBe(2);
    expect(Array.from(back.pixels)).toEqual(Array.from(pixels));
  });

  it('parses P2 ascii with comments', () => {
    const text = 'P2\n# a comment\n2 2\n255\n0 128\n255 64\n';
    const img = decodePgm(Buffer.from(text, 'ascii'));
    expect(Array.from(img.pixels)).toEqual([0, 128, 255, 64]);
  });

  it('reduces P6 to channel-mean gray', () => {
    const header = Buffer.from('P6\n1 1\n255\n', 'ascii');
    const rgb = Buffer.from([30, 60, 90]);
    const img = decodePgm(Buffer.concat([header, rgb]));
    expect(img.pixels[0]).toBe(60);
  });

  it('rejects truncated payloads and foreign formats', () => {
    expect(() => decodePgm(Buffer.from('P5\n4 4\n255\nab', 'ascii'))).toThrow(/truncated/);
    expect(() => decodePgm(Buffer.from('P7\n1 1\n255\nx', 'ascii'))).toThrow(/unsupported/);
  });
});
