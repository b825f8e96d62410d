/**
 * The color-key model: a deterministic stand-in for heavyweight
 * detector/segmenter weights, driven by an exact color -> class table.
 *
 * Frames rendered for this model paint each object instance in its own
 * flat color. Detection classes list several instance colors so that
 * touching or overlapping same-class objects still separate. Every
 * color also maps to a segmentation class id, so one frame feeds both
 * stages. Real-model backends can replace this module behind the same
 * detect/segment interfaces; outputs downstream are format-identical.
 */

import { parseHexColor } from './image.js';

/** Committed label-map class table (PGM sidecar ids). */
export const SEGMENT_CLASS_IDS: Record<string, number> = {
  road: 0,
  sidewalk: 1,
  building: 2,
  vegetation: 3,
  terrain: 4,
  person: 5,
  car: 6,
  bus: 7,
  truck: 8,
  bicycle: 9,
  'traffic light': 10,
  sky: 11,
  void: 255,
};

export interface ModelConfig {
  /** hex color -> detection class; several colors may share a class. */
  detectionColors: Record<string, string>;
  /** hex color -> segmentation class name (must exist in the class table). */
  segmentColors: Record<string, string>;
  /** blobs smaller than this many pixels are noise, not detections. */
  minBlobArea: number;
}

export const DEFAULT_MODEL: ModelConfig = {
  detectionColors: {
    '#e06060': 'person',
    '#e08080': 'person',
    '#e0a0a0': 'person',
    '#6060e0': 'car',
    '#8080e0': 'car',
    '#a0a0e0': 'car',
    '#4040c0': 'car',
    '#2020a0': 'car',
    '#5050d0': 'car',
    '#7070f0': 'car',
    '#9090f0': 'car',
    '#60e0e0': 'bus',
    '#40c0c0': 'bus',
    '#e0e060': 'truck',
    '#e060e0': 'bicycle',
    '#60e060': 'traffic light',
    '#40c040': 'traffic light',
    '#20a020': 'traffic light',
  },
  segmentColors: {
    '#808080': 'road',
    '#c0c0c0': 'sidewalk',
    '#703028': 'building',
    '#228b22': 'vegetation',
    '#9b7653': 'terrain',
    '#87ceeb': 'sky',
  },
  minBlobArea: 9,
};

export interface CompiledModel {
  detectionByKey: Map<number, string>;
  segmentIdByKey: Map<number, number>;
  classNames: Record<number, string>;
  minBlobArea: number;
}

export function compileModel(config: ModelConfig = DEFAULT_MODEL): CompiledModel {
  const detectionByKey = new Map<number, string>();
  const segmentIdByKey = new Map<number, number>();
  for (const [hex, label] of Object.entries(config.detectionColors)) {
    const key = parseHexColor(hex);
    detectionByKey.set(key, label);
    // object pixels are also segmentation pixels of the same class
    const id = SEGMENT_CLASS_IDS[label];
    if (id === undefined) throw new Error(`detection class ${label} missing from class table`);
    segmentIdByKey.set(key, id);
  }
  for (const [hex, name] of Object.entries(config.segmentColors)) {
    const id = SEGMENT_CLASS_IDS[name];
    if (id === undefined) throw new Error(`segment class ${name} missing from class table`);
    segmentIdByKey.set(parseHexColor(hex), id);
  }
  const classNames: Record<number, string> = {};
  for (const [name, id] of Object.entries(SEGMENT_CLASS_IDS)) classNames[id] = name;
  return { detectionByKey, segmentIdByKey, classNames, minBlobArea: config.minBlobArea };
}

export function loadModelConfig(json: string): ModelConfig {
  const raw = JSON.parse(json) as Partial<ModelConfig>;
  return {
    detectionColors: raw.detectionColors ?? DEFAULT_MODEL.detectionColors,
    segmentColors: raw.segmentColors ?? DEFAULT_MODEL.segmentColors,
    minBlobArea: raw.minBlobArea ?? DEFAULT_MODEL.minBlobArea,
  };
}
