/**
 * Aspect-preserving letterbox to the backbone's square input resolution:
 * bilinear resize (half-pixel centers) of the longest side to fit, centered
 * on a black canvas. Black padding keeps the non-zero-foreground convention
 * of the downstream engine intact. Masks go through the same geometry with
 * nearest-neighbor sampling so they stay binary.
 */

import * as tf from '@tensorflow/tfjs';
import type { GrayImage } from './pgm.js';

export interface LetterboxInfo {
  scaledWidth: number;
  scaledHeight: number;
  offsetX: number;
  offsetY: number;
}

export function letterboxGeometry(
  width: number,
  height: number,
  size: number,
): LetterboxInfo {
  const scale = size / Math.max(width, height);
  const scaledWidth = Math.max(1, Math.round(width * scale));
  const scaledHeight = Math.max(1, Math.round(height * scale));
  return {
    scaledWidth,
    scaledHeight,
    offsetX: Math.floor((size - scaledWidth) / 2),
    offsetY: Math.floor((size - scaledHeight) / 2),
  };
}

export function letterboxImage(image: GrayImage, size: number): GrayImage {
  const geo = letterboxGeometry(image.width, image.height, size);
  const resized = tf.tidy(() => {
    const src = tf
      .tensor3d(Float32Array.from(image.pixels), [image.height, image.width, 1]);
    const out = tf.image.resizeBilinear(
      src, [geo.scaledHeight, geo.scaledWidth], false, true,
    );
    return out.clipByValue(0, 255).round().dataSync();
  });

  const pixels = new Uint8Array(size * size);
  for (let y = 0; y < geo.scaledHeight; y++) {
    for (let x = 0; x < geo.scaledWidth; x++) {
      pixels[(geo.offsetY + y) * size + geo.offsetX + x] =
        resized[y * geo.scaledWidth + x];
    }
  }
  return { width: size, height: size, pixels };
}

export function letterboxMask(mask: GrayImage, size: number): GrayImage {
  const geo = letterboxGeometry(mask.width, mask.height, size);
  const pixels = new Uint8Array(size * size);
  for (let y = 0; y < geo.scaledHeight; y++) {
    // nearest neighbor with the same half-pixel mapping as the bilinear path
    const sy = Math.min(
      mask.height - 1,
      Math.max(0, Math.round(((y + 0.5) * mask.height) / geo.scaledHeight - 0.5)),
    );
    for (let x = 0; x < geo.scaledWidth; x++) {
      const sx = Math.min(
        mask.width - 1,
        Math.max(0, Math.round(((x + 0.5) * mask.width) / geo.scaledWidth - 0.5)),
      );
      pixels[(geo.offsetY + y) * size + geo.offsetX + x] =
        mask.pixels[sy * mask.width + sx] > 0 ? 255 : 0;
    }
  }
  return { width: size, height: size, pixels };
}
