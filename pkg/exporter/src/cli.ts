#!/usr/bin/env node
/**
 * anomap-export: run the frozen backbone over an image directory and emit
 * DADF features plus a dataset manifest.
 *
 *   anomap-export --images DIR --out DIR [--model ID] [--layer N]
 *                 [--pool cls|mean] [--batch B]
 *
 * Exit codes: 0 success, 1 configuration error, 2 some images skipped.
 */

import { parseArgs } from 'util';
import { MODELS } from './backbone.js';
import { runExport } from './exporter.js';

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        images: { type: 'string' },
        out: { type: 'string' },
        model: { type: 'string', default: 'vit-t8-128' },
        layer: { type: 'string' },
        pool: { type: 'string', default: 'cls' },
        batch: { type: 'string', default: '8' },
        help: { type: 'boolean', default: false },
      },
    });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  const v = parsed.values;
  if (v.help) {
    console.log(
      'usage: anomap-export --images DIR --out DIR [--model ID] [--layer N] ' +
      '[--pool cls|mean] [--batch B]\n' +
      `models: ${Object.keys(MODELS).join(', ')}`,
    );
    return 0;
  }
  if (!v.images || !v.out) {
    console.error('error: --images and --out are required');
    return 1;
  }
  if (v.pool !== 'cls' && v.pool !== 'mean') {
    console.error(`error: --pool must be cls or mean, got ${v.pool}`);
    return 1;
  }

  try {
    const report = runExport({
      imagesDir: v.images,
      outDir: v.out,
      modelId: v.model!,
      layer: v.layer === undefined ? undefined : Number(v.layer),
      pool: v.pool,
      batchSize: Number(v.batch),
    });
    console.log(
      `exported ${report.exported.length} image(s), skipped ${report.skipped.length}; ` +
      `manifest: ${report.manifestPath}`,
    );
    return report.skipped.length ? 2 : 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
