import { spawnSync } from 'child_process';
import { mkdtempSync, readFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { decodeTensor, encodeTensor, readTensor, writeTensor } from './dadf.js';

describe('dadf encoding', () => {
  it('lays out the header exactly', () => {
    const buf = encodeTensor([2, 2], new Float32Array([1, 2, 3, 4]));
    expect(buf.subarray(0, 4).toString('ascii')).toBe('DADF');
    expect(buf.readUInt32LE(4)).toBe(1); // version
    expect(buf.readUInt8(8)).toBe(1); // f32 dtype code
    expect(buf.readUInt8(9)).toBe(2); // ndim
    expect(buf.readUInt16LE(10)).toBe(0); // padding
    expect(Number(buf.readBigUInt64LE(12))).toBe(2);
    expect(Number(buf.readBigUInt64LE(20))).toBe(2);
    expect(buf.length).toBe(12 + 16 + 16);
  });

  it('round-trips bit-exactly', () => {
    const data = new Float32Array([0.25, -1.5, 3.125, 0, 42, -0.0078125]);
    const tensor = decodeTensor(encodeTensor([2, 3], data));
    expect(tensor.dims).toEqual([2, 3]);
    expect(Array.from(tensor.data)).toEqual(Array.from(data));
  });

  it('rejects NaN and bad shapes', () => {
    expect(() => encodeTensor([2], new Float32Array([1, NaN]))).toThrow(/NaN/);
    expect(() => encodeTensor([2, 2], new Float32Array(3))).toThrow(/length/);
    expect(() => encodeTensor([1, 1, 1, 1], new Float32Array(1))).toThrow(/rank/);
    expect(() => encodeTensor([0], new Float32Array(0))).toThrow(/positive/);
  });

  it('rejects corrupted buffers', () => {
    const buf = encodeTensor([3], new Float32Array([1, 2, 3]));
    const bad = Buffer.from(buf);
    bad.write('XXXX', 0, 'ascii');
    expect(() => decodeTensor(bad)).toThrow(/magic/);
    expect(() => decodeTensor(buf.subarray(0, buf.length - 4))).toThrow(/mismatch/);
  });

  it('is byte-compatible with the engine implementation', () => {
    const dir = mkdtempSync(join(tmpdir(), 'dadf-'));
    const ours = join(dir, 'ts.dadf');
    const theirs = join(dir, 'py.dadf');
    writeTensor(ours, [2, 2], new Float32Array([1, 2, 3, 4]));

    const python = spawnSync('python3', ['-c', `
import numpy as np
from anomap.tensor_io import read_tensor, write_tensor
write_tensor(np.array([[1, 2], [3, 4]], dtype=np.float32), ${JSON.stringify(theirs)})
t = read_tensor(${JSON.stringify(ours)})
assert t.shape == (2, 2) and t.tolist() == [[1, 2], [3, 4]], t
`], { encoding: 'utf-8' });
    expect(python.status, python.stderr).toBe(0);
    expect(readFileSync(ours).equals(readFileSync(theirs))).toBe(true);
    expect(Array.from(readTensor(theirs).data)).toEqual([1, 2, 3, 4]);
  });
});
