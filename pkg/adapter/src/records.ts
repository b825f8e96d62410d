/**
 * Emit scene records in the downstream pipeline's line-delimited JSON
 * schema. The adapter never calls the pipeline in-process; these files
 * (plus the PGM maps) are the entire interface.
 *
 * Detections go out raw — no distance_m, no region — because spatial
 * annotation is the consumer's job. Telemetry is a neutral placeholder
 * unless provided; a CAN log merge downstream replaces it.
 */

import { Detection } from './detect.js';
import { SegmentationSummary } from './coverage.js';

export interface FrameContext {
  scenarioId: string;
  timestampMs: number;
  frameRef: string | null;
  frameWidth: number;
  frameHeight: number;
  lat?: number;
  lon?: number;
  address?: string | null;
}

export interface SceneRecordJson {
  scenario_id: string;
  timestamp_ms: number;
  frame_ref: string | null;
  frame_width: number;
  frame_height: number;
  detections: Array<{
    class_label: string;
    confidence: number;
    bbox: [number, number, number, number];
    distance_m: null;
    region: null;
  }>;
  segmentation: SegmentationSummary;
  telemetry: { speed_kmh: number; brake_pressed: boolean; steering_angle_deg: number };
  geofix: { lat: number; lon: number; address: string | null };
}

export function buildRecord(
  context: FrameContext,
  detections: Detection[],
  segmentation: SegmentationSummary,
): SceneRecordJson {
  return {
    scenario_id: context.scenarioId,
    timestamp_ms: context.timestampMs,
    frame_ref: context.frameRef,
    frame_width: context.frameWidth,
    frame_height: context.frameHeight,
    detections: detections.map((d) => ({
      class_label: d.class_label,
      confidence: d.confidence,
      bbox: d.bbox,
      distance_m: null,
      region: null,
    })),
    segmentation,
    telemetry: { speed_kmh: 0.0, brake_pressed: false, steering_angle_deg: 0.0 },
    geofix: { lat: context.lat ?? 0.0, lon: context.lon ?? 0.0, address: context.address ?? null },
  };
}

export function recordToLine(record: SceneRecordJson): string {
  return JSON.stringify(record);
}
