/**
 * Object detection over color-keyed frames: connected components per
 * instance color, each blob becoming one detection with an axis-aligned
 * box (x2/y2 exclusive, matching the record format).
 */

import { RgbImage, colorKeyAt, readPpm } from './image.js';
import { CompiledModel, compileModel, ModelConfig } from './palette.js';

export interface Detection {
  class_label: string;
  confidence: number;
  bbox: [number, number, number, number];
}

interface Blob {
  label: string;
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
  area: number;
  firstIndex: number;
}

function findBlobs(image: RgbImage, model: CompiledModel): Blob[] {
  const { width, height } = image;
  // bucket pixel indices by detection color
  const byKey = new Map<number, number[]>();
  for (let i = 0; i < width * height; i++) {
    const key = colorKeyAt(image, i);
    if (model.detectionByKey.has(key)) {
      let bucket = byKey.get(key);
      if (!bucket) byKey.set(key, (bucket = []));
      bucket.push(i);
    }
  }

  const blobs: Blob[] = [];
  for (const [key, indices] of byKey) {
    const label = model.detectionByKey.get(key)!;
    const members = new Set(indices);
    const seen = new Set<number>();
    for (const start of indices) {
      if (seen.has(start)) continue;
      // BFS over 4-connected pixels of this exact color
      const queue = [start];
      seen.add(start);
      const blob: Blob = {
        label,
        minX: width,
        minY: height,
        maxX: -1,
        maxY: -1,
        area: 0,
        firstIndex: start,
      };
      while (queue.length > 0) {
        const index = queue.pop()!;
        const x = index % width;
        const y = (index - x) / width;
        blob.area++;
        if (x < blob.minX) blob.minX = x;
        if (x > blob.maxX) blob.maxX = x;
        if (y < blob.minY) blob.minY = y;
        if (y > blob.maxY) blob.maxY = y;
        if (index < blob.firstIndex) blob.firstIndex = index;
        const neighbors = [
          x > 0 ? index - 1 : -1,
          x < width - 1 ? index + 1 : -1,
          y > 0 ? index - width : -1,
          y < height - 1 ? index + width : -1,
        ];
        for (const n of neighbors) {
          if (n >= 0 && members.has(n) && !seen.has(n)) {
            seen.add(n);
            queue.push(n);
          }
        }
      }
      blobs.push(blob);
    }
  }
  return blobs;
}

/** Score a blob by how much of its box it fills: solid shapes read as
 * confident detections, sparse scatter as weak ones. */
function blobConfidence(blob: Blob): number {
  const boxArea = (blob.maxX - blob.minX + 1) * (blob.maxY - blob.minY + 1);
  const fill = blob.area / boxArea;
  return Math.min(0.99, Math.round((0.5 + 0.49 * fill) * 100) / 100);
}

export function detectImage(image: RgbImage, config?: ModelConfig): Detection[] {
  const model = compileModel(config);
  const blobs = findBlobs(image, model).filter((b) => b.area >= model.minBlobArea);
  blobs.sort((a, b) => a.firstIndex - b.firstIndex); // deterministic scan order
  return blobs.map((blob) => ({
    class_label: blob.label,
    confidence: blobConfidence(blob),
    bbox: [blob.minX, blob.minY, blob.maxX + 1, blob.maxY + 1],
  }));
}

/** Detect objects in a frame image file. */
export function detect(framePath: string, config?: ModelConfig): Detection[] {
  return detectImage(readPpm(framePath), config);
}
