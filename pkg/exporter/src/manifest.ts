/**
 * Dataset manifest emission, matching the engine's schema exactly:
 * `manifest.json` with `patch_size`, `feature_dim`, `normal` and `query`
 * entry lists. Repeated export runs append to an existing manifest so
 * normals and queries can be produced in separate invocations.
 */

import { existsSync, readFileSync, writeFileSync } from 'fs';
import { join } from 'path';

export interface EntryRecord {
  id: string;
  image_path: string | null;
  embed_path: string;
  patch_path: string;
  mask_path?: string | null;
}

export interface ManifestDoc {
  patch_size: number;
  feature_dim: number;
  normal: EntryRecord[];
  query: EntryRecord[];
  exporter?: Record<string, unknown>;
}

export function appendManifest(
  outDir: string,
  patchSize: number,
  featureDim: number,
  normals: EntryRecord[],
  queries: EntryRecord[],
  exporterMeta: Record<string, unknown>,
): string {
  const path = join(outDir, 'manifest.json');
  let doc: ManifestDoc = {
    patch_size: patchSize,
    feature_dim: featureDim,
    normal: [],
    query: [],
  };
  if (existsSync(path)) {
    doc = JSON.parse(readFileSync(path, 'utf-8')) as ManifestDoc;
    if (doc.patch_size !== patchSize || doc.feature_dim !== featureDim) {
      throw new Error(
        `existing manifest has patch_size=${doc.patch_size}, feature_dim=${doc.feature_dim}; ` +
        `this run produces ${patchSize}/${featureDim}`,
      );
    }
  }

  const seen = new Set([...doc.normal, ...doc.query].map((e) => e.id));
  for (const entry of [...normals, ...queries]) {
    if (seen.has(entry.id)) {
      throw new Error(`duplicate entry id '${entry.id}' in manifest`);
    }
    seen.add(entry.id);
  }
  doc.normal.push(...normals);
  doc.query.push(...queries);
  doc.exporter = exporterMeta;
  writeFileSync(path, JSON.stringify(doc, null, 2) + '\n', 'utf-8');
  return path;
}
