#!/usr/bin/env node
/**
 * Batch entry point: run detection + segmentation over frame images and
 * emit one record line per frame plus one PGM label map each.
 *
 *   perception-adapter --frames a.ppm b.ppm --out records.jsonl --map-dir maps/
 *
 * Options: --model <config.json> overrides the color-key model,
 * --base-timestamp-ms and --frame-interval-ms control record timing,
 * --lat/--lon set the geofix for all frames.
 */

import * as fs from 'fs';
import * as path from 'path';
import { parseArgs } from 'util';

import { detect } from './detect.js';
import { readPpm } from './image.js';
import { coverageSummary } from './coverage.js';
import { loadModelConfig, ModelConfig } from './palette.js';
import { buildRecord, recordToLine } from './records.js';
import { segment } from './segment.js';

export function runBatch(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      frames: { type: 'string', multiple: true },
      out: { type: 'string' },
      'map-dir': { type: 'string' },
      model: { type: 'string' },
      'base-timestamp-ms': { type: 'string', default: '0' },
      'frame-interval-ms': { type: 'string', default: '1000' },
      lat: { type: 'string', default: '0' },
      lon: { type: 'string', default: '0' },
    },
  });

  const frames = values.frames ?? [];
  if (frames.length === 0 || !values.out || !values['map-dir']) {
    console.error('usage: perception-adapter --frames <f.ppm...> --out <records.jsonl> --map-dir <dir>');
    return 2;
  }
  let model: ModelConfig | undefined;
  if (values.model) model = loadModelConfig(fs.readFileSync(values.model, 'utf-8'));

  const base = Number(values['base-timestamp-ms']);
  const interval = Number(values['frame-interval-ms']);
  const lines: string[] = [];
  for (let i = 0; i < frames.length; i++) {
    const framePath = frames[i];
    const stem = path.basename(framePath).replace(/\.[^.]+$/, '');
    const image = readPpm(framePath);
    const detections = detect(framePath, model);
    const mapPath = path.join(values['map-dir'], `${stem}.pgm`);
    const result = segment(framePath, mapPath, model);
    const summary = coverageSummary(result.labelMap, result.classNames);
    const record = buildRecord(
      {
        scenarioId: stem,
        timestampMs: base + i * interval,
        frameRef: framePath,
        frameWidth: image.width,
        frameHeight: image.height,
        lat: Number(values.lat),
        lon: Number(values.lon),
      },
      detections,
      summary,
    );
    lines.push(recordToLine(record));
    console.error(
      `${stem}: ${detections.length} detections, road ${(summary.road_global_fraction * 100).toFixed(2)}%, map ${mapPath}`,
    );
  }
  fs.mkdirSync(path.dirname(path.resolve(values.out)), { recursive: true });
  fs.writeFileSync(values.out, lines.join('\n') + (lines.length ? '\n' : ''));
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(runBatch(process.argv.slice(2)));
}
