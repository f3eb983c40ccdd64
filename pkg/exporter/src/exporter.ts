/**
 * Export pipeline: discover images, letterbox them to the backbone's input
 * resolution, run the frozen transformer, and write per-image artifacts:
 *
 *   <out>/images/<stem>.pgm        letterboxed raster (what the features see)
 *   <out>/feats/<stem>.embed.dadf  [D] global descriptor, final layer
 *   <out>/feats/<stem>.patch.dadf  [Hp, Wp, D] intermediate patch features
 *   <out>/masks/<stem>.pgm         letterboxed ground-truth mask (if given)
 *   <out>/manifest.json            dataset manifest consumed by the engine
 *
 * Discovery: `<images>/normal/*` and `<images>/query/*` subdirectories when
 * present, otherwise every image directly in `<images>` is a normal. A mask
 * for query `x` is looked up at `<images>/masks/x.pgm`.
 */

import { existsSync, mkdirSync, readdirSync, statSync } from 'fs';
import { basename, extname, join } from 'path';
import { FrozenBackbone, resolveModel } from './backbone.js';
import { writeTensor } from './dadf.js';
import { EntryRecord, appendManifest } from './manifest.js';
import { GrayImage, readImage, writePgm } from './pgm.js';
import { letterboxImage, letterboxMask } from './resize.js';

export interface ExportConfig {
  imagesDir: string;
  outDir: string;
  modelId: string;
  /** 1-based transformer block to tap for patch features; default depth-3 */
  layer?: number;
  pool: 'cls' | 'mean';
  batchSize: number;
}

export interface ExportReport {
  manifestPath: string;
  exported: string[];
  skipped: { path: string; reason: string }[];
}

const IMAGE_EXTS = new Set(['.pgm', '.ppm', '.pnm']);

function listImages(dir: string): string[] {
  if (!existsSync(dir)) return [];
  return readdirSync(dir)
    .filter((name) => IMAGE_EXTS.has(extname(name).toLowerCase()))
    .sort()
    .map((name) => join(dir, name));
}

function discover(imagesDir: string): { normals: string[]; queries: string[] } {
  if (!existsSync(imagesDir) || !statSync(imagesDir).isDirectory()) {
    throw new Error(`images directory not found: ${imagesDir}`);
  }
  const normalDir = join(imagesDir, 'normal');
  const queryDir = join(imagesDir, 'query');
  if (existsSync(normalDir) || existsSync(queryDir)) {
    return { normals: listImages(normalDir), queries: listImages(queryDir) };
  }
  return { normals: listImages(imagesDir), queries: [] };
}

function chunk<T>(items: T[], size: number): T[][] {
  const out: T[][] = [];
  for (let i = 0; i < items.length; i += size) out.push(items.slice(i, i + size));
  return out;
}

export function runExport(config: ExportConfig): ExportReport {
  const spec = resolveModel(config.modelId);
  const backbone = new FrozenBackbone(spec);
  const layer = config.layer ?? backbone.defaultLayer();
  if (!Number.isInteger(layer) || layer < 1 || layer > spec.depth) {
    throw new Error(`layer must be in [1, ${spec.depth}] for ${spec.id}, got ${layer}`);
  }
  if (config.batchSize < 1) throw new Error('batch size must be >= 1');

  const { normals, queries } = discover(config.imagesDir);
  if (normals.length + queries.length === 0) {
    throw new Error(`no images found under ${config.imagesDir}`);
  }

  for (const sub of ['images', 'feats', 'masks']) {
    mkdirSync(join(config.outDir, sub), { recursive: true });
  }

  const skipped: { path: string; reason: string }[] = [];
  const exported: string[] = [];

  const processOne = (path: string, isQuery: boolean): EntryRecord | null => {
    let image: GrayImage;
    try {
      image = readImage(path);
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      console.warn(`skipping ${path}: ${reason}`);
      skipped.push({ path, reason });
      return null;
    }
    const stem = basename(path, extname(path));
    const boxed = letterboxImage(image, spec.inputSize);
    const result = backbone.forward(boxed.pixels, layer, config.pool);
    const grid = result.gridSize;

    writePgm(join(config.outDir, 'images', `${stem}.pgm`), boxed);
    writeTensor(
      join(config.outDir, 'feats', `${stem}.embed.dadf`),
      [spec.dim], result.embedding,
    );
    writeTensor(
      join(config.outDir, 'feats', `${stem}.patch.dadf`),
      [grid, grid, spec.dim], result.patchFeatures,
    );

    let maskPath: string | null = null;
    if (isQuery) {
      const candidate = join(config.imagesDir, 'masks', `${stem}.pgm`);
      if (existsSync(candidate)) {
        const mask = letterboxMask(readImage(candidate), spec.inputSize);
        writePgm(join(config.outDir, 'masks', `${stem}.pgm`), mask);
        maskPath = `masks/${stem}.pgm`;
      }
    }

    exported.push(stem);
    return {
      id: stem,
      image_path: `images/${stem}.pgm`,
      embed_path: `feats/${stem}.embed.dadf`,
      patch_path: `feats/${stem}.patch.dadf`,
      ...(isQuery ? { mask_path: maskPath } : {}),
    };
  };

  const normalRecords: EntryRecord[] = [];
  const queryRecords: EntryRecord[] = [];
  for (const batch of chunk(normals, config.batchSize)) {
    for (const p of batch) {
      const rec = processOne(p, false);
      if (rec) normalRecords.push(rec);
    }
  }
  for (const batch of chunk(queries, config.batchSize)) {
    for (const p of batch) {
      const rec = processOne(p, true);
      if (rec) queryRecords.push(rec);
    }
  }

  const manifestPath = appendManifest(
    config.outDir, spec.patchSize, spec.dim, normalRecords, queryRecords,
    {
      model: spec.id,
      layer,
      pool: config.pool,
      resize: `letterbox-bilinear-${spec.inputSize}`,
    },
  );
  return { manifestPath, exported, skipped };
}
