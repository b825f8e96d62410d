/**
 * Per-side coverage summary in the downstream record schema: left half
 * is columns [0, floor(W/2)), the midline column belongs to the right
 * half, road is reported globally and excluded from per-side stats.
 */

import { GrayImage } from './image.js';

export const PRESENCE_THRESHOLD = 0.001; // 0.1% per side

const CANONICAL_ORDER = ['road', 'sidewalk', 'person', 'building', 'vegetation', 'terrain'];

export interface SegClassStat {
  class_label: string;
  left_fraction: number;
  right_fraction: number;
  present_left: boolean;
  present_right: boolean;
}

export interface SegmentationSummary {
  road_global_fraction: number;
  stats: SegClassStat[];
}

function canonicalRank(label: string): [number, string] {
  const index = CANONICAL_ORDER.indexOf(label.toLowerCase());
  return [index === -1 ? CANONICAL_ORDER.length : index, label.toLowerCase()];
}

export function coverageSummary(
  labelMap: GrayImage,
  classNames: Record<number, string>,
  presenceThreshold: number = PRESENCE_THRESHOLD,
): SegmentationSummary {
  const { width, height, data } = labelMap;
  if (width < 2) throw new Error(`frame width ${width} cannot be split into halves`);
  const half = Math.floor(width / 2);
  const leftArea = half * height;
  const rightArea = (width - half) * height;

  const leftCounts = new Map<number, number>();
  const rightCounts = new Map<number, number>();
  for (let y = 0; y < height; y++) {
    const row = y * width;
    for (let x = 0; x < width; x++) {
      const id = data[row + x];
      const bucket = x < half ? leftCounts : rightCounts;
      bucket.set(id, (bucket.get(id) ?? 0) + 1);
    }
  }

  let roadPixels = 0;
  const stats: SegClassStat[] = [];
  const ids = new Set([...leftCounts.keys(), ...rightCounts.keys()]);
  for (const id of [...ids].sort((a, b) => a - b)) {
    const name = classNames[id];
    if (name === undefined) throw new Error(`label map contains unnamed class id ${id}`);
    const left = leftCounts.get(id) ?? 0;
    const right = rightCounts.get(id) ?? 0;
    if (name.toLowerCase() === 'road') {
      roadPixels += left + right;
      continue;
    }
    const leftFraction = left / leftArea;
    const rightFraction = right / rightArea;
    stats.push({
      class_label: name,
      left_fraction: leftFraction,
      right_fraction: rightFraction,
      present_left: leftFraction >= presenceThreshold,
      present_right: rightFraction >= presenceThreshold,
    });
  }
  stats.sort((a, b) => {
    const [ra, la] = canonicalRank(a.class_label);
    const [rb, lb] = canonicalRank(b.class_label);
    return ra - rb || la.localeCompare(lb);
  });
  return { road_global_fraction: roadPixels / (width * height), stats };
}
