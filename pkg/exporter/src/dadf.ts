/**
 * DADF tensor container (little-endian):
 *   "DADF" | u32 version=1 | u8 dtype=1 (f32) | u8 ndim | 2 zero bytes |
 *   ndim x u64 dims | row-major float32 payload
 *
 * This byte layout is the interchange contract with the anomap engine;
 * non-finite values are rejected on write and read.
 */

import { readFileSync, writeFileSync } from 'fs';

const MAGIC = Buffer.from('DADF', 'ascii');
const VERSION = 1;
const DTYPE_F32 = 1;
const HEADER_SIZE = 12;

export interface Tensor {
  dims: number[];
  data: Float32Array;
}

function product(dims: number[]): number {
  return dims.reduce((a, b) => a * b, 1);
}

export function encodeTensor(dims: number[], data: Float32Array): Buffer {
  if (dims.length < 1 || dims.length > 3) {
    throw new Error(`tensor rank must be 1, 2 or 3, got ${dims.length}`);
  }
  if (dims.some((d) => !Number.isInteger(d) || d < 1)) {
    throw new Error(`all dims must be positive integers, got [${dims}]`);
  }
  if (data.length !== product(dims)) {
    throw new Error(`data length ${data.length} != product of dims [${dims}]`);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) throw new Error('tensor contains NaN or Inf');
  }

  const buf = Buffer.alloc(HEADER_SIZE + 8 * dims.length + 4 * data.length);
  MAGIC.copy(buf, 0);
  buf.writeUInt32LE(VERSION, 4);
  buf.writeUInt8(DTYPE_F32, 8);
  buf.writeUInt8(dims.length, 9);
  dims.forEach((d, i) => buf.writeBigUInt64LE(BigInt(d), HEADER_SIZE + 8 * i));
  const payloadOffset = HEADER_SIZE + 8 * dims.length;
  data.forEach((v, i) => buf.writeFloatLE(v, payloadOffset + 4 * i));
  return buf;
}

export function writeTensor(path: string, dims: number[], data: Float32Array): void {
  writeFileSync(path, encodeTensor(dims, data));
}

export function decodeTensor(buf: Buffer): Tensor {
  if (buf.length < HEADER_SIZE || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error('bad DADF magic');
  }
  if (buf.readUInt32LE(4) !== VERSION) throw new Error('unsupported DADF version');
  if (buf.readUInt8(8) !== DTYPE_F32) throw new Error('unsupported DADF dtype');
  const ndim = buf.readUInt8(9);
  if (ndim < 1 || ndim > 3) throw new Error(`bad ndim ${ndim}`);
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) {
    dims.push(Number(buf.readBigUInt64LE(HEADER_SIZE + 8 * i)));
  }
  const payloadOffset = HEADER_SIZE + 8 * ndim;
  const count = product(dims);
  if (buf.length !== payloadOffset + 4 * count) {
    throw new Error(`payload length mismatch for dims [${dims}]`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = buf.readFloatLE(payloadOffset + 4 * i);
    if (!Number.isFinite(data[i])) throw new Error('payload contains NaN or Inf');
  }
  return { dims, data };
}

export function readTensor(path: string): Tensor {
  return decodeTensor(readFileSync(path));
}
