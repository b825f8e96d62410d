export { detect, detectImage, type Detection } from './detect.js';
export { segment, segmentImage, classFraction, dominantClass, sidecarPath, type SegmentResult } from './segment.js';
export { coverageSummary, PRESENCE_THRESHOLD, type SegmentationSummary, type SegClassStat } from './coverage.js';
export { buildRecord, recordToLine, type FrameContext, type SceneRecordJson } from './records.js';
export { DEFAULT_MODEL, SEGMENT_CLASS_IDS, compileModel, loadModelConfig, type ModelConfig } from './palette.js';
export { readPpm, writePpm, readPgm, writePgm, type RgbImage, type GrayImage } from './image.js';
export { runBatch } from './cli.js';
