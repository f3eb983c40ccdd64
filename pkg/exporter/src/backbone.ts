/**
 * Frozen vision-transformer backbone with deterministically generated
 * weights.
 *
 * No pretrained checkpoints ship with this tool (and none can be fetched
 * offline), so each model id names a fixed architecture whose weights are
 * materialized from a splitmix64 stream keyed by `modelId/parameterName`.
 * The weights never change between runs or machines. A real checkpoint can
 * be substituted by implementing the same forward interface; everything
 * downstream only relies on shapes and determinism.
 */

import * as tf from '@tensorflow/tfjs';
import { SplitMix64, fnv1a64 } from './rng.js';

export interface ModelSpec {
  id: string;
  inputSize: number;
  patchSize: number;
  dim: number;
  depth: number;
  heads: number;
  mlpRatio: number;
}

export const MODELS: Record<string, ModelSpec> = {
  'vit-t8-128': { id: 'vit-t8-128', inputSize: 128, patchSize: 8, dim: 64, depth: 4, heads: 4, mlpRatio: 2 },
  'vit-t8-64': { id: 'vit-t8-64', inputSize: 64, patchSize: 8, dim: 32, depth: 3, heads: 2, mlpRatio: 2 },
};

export function resolveModel(modelId: string): ModelSpec {
  const spec = MODELS[modelId];
  if (!spec) {
    throw new Error(`unknown model '${modelId}'; available: ${Object.keys(MODELS).join(', ')}`);
  }
  return spec;
}

export interface ForwardResult {
  /** [hp, wp, dim] features from the requested intermediate block */
  patchFeatures: Float32Array;
  /** [dim] global descriptor from the final block (cls token or patch mean) */
  embedding: Float32Array;
  gridSize: number;
}

function frozenTensor(modelId: string, name: string, shape: number[], scale: number): tf.Tensor {
  const stream = new SplitMix64(fnv1a64(`${modelId}/${name}`));
  const count = shape.reduce((a, b) => a * b, 1);
  const values = new Float32Array(count);
  for (let i = 0; i < count; i++) values[i] = stream.nextGauss() * scale;
  return tf.tensor(values, shape);
}

function layerNorm(x: tf.Tensor2D, gamma: tf.Tensor, beta: tf.Tensor): tf.Tensor2D {
  const { mean, variance } = tf.moments(x, 1, true);
  return x.sub(mean).div(variance.add(1e-6).sqrt()).mul(gamma).add(beta) as tf.Tensor2D;
}

export class FrozenBackbone {
  readonly spec: ModelSpec;
  private readonly weights: Map<string, tf.Tensor> = new Map();

  constructor(spec: ModelSpec) {
    this.spec = spec;
    const { id, patchSize, dim, depth, mlpRatio, inputSize } = spec;
    const tokens = (inputSize / patchSize) ** 2 + 1;
    const add = (name: string, shape: number[], scale: number) =>
      this.weights.set(name, frozenTensor(id, name, shape, scale));

    add('patch_proj', [patchSize * patchSize, dim], 1 / Math.sqrt(patchSize * patchSize));
    add('patch_bias', [dim], 0.01);
    add('cls_token', [1, dim], 0.02);
    add('pos_embed', [tokens, dim], 0.02);
    for (let b = 0; b < depth; b++) {
      add(`block${b}/ln1_gamma`, [dim], 0.0);
      add(`block${b}/ln1_beta`, [dim], 0.0);
      add(`block${b}/qkv`, [dim, 3 * dim], 1 / Math.sqrt(dim));
      add(`block${b}/qkv_bias`, [3 * dim], 0.01);
      add(`block${b}/attn_proj`, [dim, dim], 1 / Math.sqrt(dim));
      add(`block${b}/attn_bias`, [dim], 0.01);
      add(`block${b}/ln2_gamma`, [dim], 0.0);
      add(`block${b}/ln2_beta`, [dim], 0.0);
      add(`block${b}/mlp_fc1`, [dim, dim * mlpRatio], 1 / Math.sqrt(dim));
      add(`block${b}/mlp_fc1_bias`, [dim * mlpRatio], 0.01);
      add(`block${b}/mlp_fc2`, [dim * mlpRatio, dim], 1 / Math.sqrt(dim * mlpRatio));
      add(`block${b}/mlp_fc2_bias`, [dim], 0.01);
    }
    add('final_ln_gamma', [dim], 0.0);
    add('final_ln_beta', [dim], 0.0);
    // layer-norm scales are 1+noise, offsets stay as drawn at scale 0
    for (const [name, t] of [...this.weights]) {
      if (name.endsWith('_gamma')) {
        this.weights.set(name, t.add(tf.scalar(1)));
        t.dispose();
      }
    }
  }

  private w(name: string): tf.Tensor {
    const t = this.weights.get(name);
    if (!t) throw new Error(`missing weight ${name}`);
    return t;
  }

  /**
   * Run the frozen transformer on a letterboxed square grayscale image
   * (8-bit intensities). `layer` is 1-based: patch features are taken from
   * the output of that block; the embedding always comes from the final
   * block (plus final layer norm).
   */
  forward(pixels: Uint8Array, layer: number, pool: 'cls' | 'mean'): ForwardResult {
    const { inputSize, patchSize, dim, depth, heads } = this.spec;
    if (pixels.length !== inputSize * inputSize) {
      throw new Error(`expected ${inputSize}x${inputSize} input, got ${pixels.length} pixels`);
    }
    if (!Number.isInteger(layer) || layer < 1 || layer > depth) {
      throw new Error(`layer must be in [1, ${depth}], got ${layer}`);
    }
    const grid = inputSize / patchSize;
    const tokens = grid * grid + 1;
    const headDim = dim / heads;

    return tf.tidy(() => {
      const img = tf
        .tensor2d(Float32Array.from(pixels), [inputSize, inputSize])
        .div(tf.scalar(255));
      const patches = img
        .reshape([grid, patchSize, grid, patchSize])
        .transpose([0, 2, 1, 3])
        .reshape([grid * grid, patchSize * patchSize]);
      let x = patches
        .matMul(this.w('patch_proj') as tf.Tensor2D)
        .add(this.w('patch_bias')) as tf.Tensor2D;
      x = tf.concat([this.w('cls_token') as tf.Tensor2D, x], 0) as tf.Tensor2D;
      x = x.add(this.w('pos_embed')) as tf.Tensor2D;

      let tapped: tf.Tensor2D | null = null;
      for (let b = 0; b < depth; b++) {
        const normed = layerNorm(x, this.w(`block${b}/ln1_gamma`), this.w(`block${b}/ln1_beta`));
        const qkv = normed
          .matMul(this.w(`block${b}/qkv`) as tf.Tensor2D)
          .add(this.w(`block${b}/qkv_bias`))
          .reshape([tokens, 3, heads, headDim])
          .transpose([1, 2, 0, 3]); // [3, heads, tokens, headDim]
        const q = qkv.slice([0, 0, 0, 0], [1, heads, tokens, headDim]).squeeze([0]);
        const k = qkv.slice([1, 0, 0, 0], [1, heads, tokens, headDim]).squeeze([0]);
        const v = qkv.slice([2, 0, 0, 0], [1, heads, tokens, headDim]).squeeze([0]);
        const attn = tf.softmax(
          tf.matMul(q, k, false, true).div(tf.scalar(Math.sqrt(headDim))), -1,
        );
        const context = tf
          .matMul(attn, v) // [heads, tokens, headDim]
          .transpose([1, 0, 2])
          .reshape([tokens, dim]);
        x = x.add(
          context
            .matMul(this.w(`block${b}/attn_proj`) as tf.Tensor2D)
            .add(this.w(`block${b}/attn_bias`)),
        ) as tf.Tensor2D;

        const normed2 = layerNorm(x, this.w(`block${b}/ln2_gamma`), this.w(`block${b}/ln2_beta`));
        const hidden = normed2
          .matMul(this.w(`block${b}/mlp_fc1`) as tf.Tensor2D)
          .add(this.w(`block${b}/mlp_fc1_bias`))
          .relu();
        x = x.add(
          hidden
            .matMul(this.w(`block${b}/mlp_fc2`) as tf.Tensor2D)
            .add(this.w(`block${b}/mlp_fc2_bias`)),
        ) as tf.Tensor2D;

        if (b + 1 === layer) tapped = x;
      }

      const final = layerNorm(x, this.w('final_ln_gamma'), this.w('final_ln_beta'));
      const pooled =
        pool === 'cls'
          ? final.slice([0, 0], [1, dim]).reshape([dim])
          : final.slice([1, 0], [tokens - 1, dim]).mean(0);
      const patchFeatures = tapped!
        .slice([1, 0], [tokens - 1, dim])
        .reshape([grid, grid, dim]);

      return {
        patchFeatures: patchFeatures.dataSync() as Float32Array,
        embedding: pooled.dataSync() as Float32Array,
        gridSize: grid,
      };
    });
  }

  /** Default intermediate tap: three blocks before the final one. */
  defaultLayer(): number {
    return Math.max(1, this.spec.depth - 3);
  }
}
