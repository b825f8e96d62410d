/**
 * Semantic segmentation over color-keyed frames: every pixel maps to a
 * class id through the model's color table (unknown colors become
 * "void"). The label map ships as 8-bit PGM plus a JSON sidecar naming
 * every id, the exact format the downstream pipeline ingests.
 */

import * as fs from 'fs';
import * as path from 'path';

import { GrayImage, RgbImage, colorKeyAt, readPpm, writePgm } from './image.js';
import { CompiledModel, compileModel, ModelConfig, SEGMENT_CLASS_IDS } from './palette.js';

export interface SegmentResult {
  mapPath: string;
  classTablePath: string;
  labelMap: GrayImage;
  classNames: Record<number, string>;
}

export function segmentImage(image: RgbImage, config?: ModelConfig): GrayImage {
  const model: CompiledModel = compileModel(config);
  const voidId = SEGMENT_CLASS_IDS['void'];
  const data = new Uint8Array(image.width * image.height);
  for (let i = 0; i < data.length; i++) {
    const id = model.segmentIdByKey.get(colorKeyAt(image, i));
    data[i] = id === undefined ? voidId : id;
  }
  return { width: image.width, height: image.height, data };
}

export function sidecarPath(mapPath: string): string {
  return mapPath.replace(/\.pgm$/i, '') + '.classes.json';
}

/** Segment a frame file and write the PGM map plus its class table. */
export function segment(framePath: string, outMapPath: string, config?: ModelConfig): SegmentResult {
  const labelMap = segmentImage(readPpm(framePath), config);
  fs.mkdirSync(path.dirname(outMapPath), { recursive: true });
  writePgm(outMapPath, labelMap);
  const model = compileModel(config);
  const classTablePath = sidecarPath(outMapPath);
  const table: Record<string, string> = {};
  for (const [id, name] of Object.entries(model.classNames)) table[id] = name;
  fs.writeFileSync(classTablePath, JSON.stringify(table, null, 0) + '\n');
  return { mapPath: outMapPath, classTablePath, labelMap, classNames: model.classNames };
}

/** Pixel share of one class over the whole map (diagnostics/tests). */
export function classFraction(labelMap: GrayImage, classId: number): number {
  let count = 0;
  for (const id of labelMap.data) if (id === classId) count++;
  return count / (labelMap.width * labelMap.height);
}

/** Most frequent class id in the map. */
export function dominantClass(labelMap: GrayImage): number {
  const counts = new Map<number, number>();
  for (const id of labelMap.data) counts.set(id, (counts.get(id) ?? 0) + 1);
  let best = -1;
  let bestCount = -1;
  for (const [id, count] of counts) {
    if (count > bestCount) {
      best = id;
      bestCount = count;
    }
  }
  return best;
}
