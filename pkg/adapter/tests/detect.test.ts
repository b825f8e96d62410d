import { describe, expect, it } from 'vitest';

import { detectImage } from '../src/detect.js';
import {
  SCENE1_CAR_BOXES,
  SCENE1_PERSON_BOXES,
  intersectionOverUnion,
  paintRect,
  scene1Replica,
  solidFrame,
} from './helpers.js';

describe('detectImage', () => {
  it('finds nothing in a blank frame', () => {
    expect(detectImage(solidFrame(64, 64, '#000000'))).toEqual([]);
  });

  it('finds exactly one person for a single high-contrast cutout', () => {
    const frame = solidFrame(320, 240, '#87ceeb');
    paintRect(frame, '#e06060', 100, 60, 140, 180);
    const detections = detectImage(frame);
    expect(detections).toHaveLength(1);
    expect(detections[0].class_label).toBe('person');
    expect(detections[0].bbox).toEqual([100, 60, 140, 180]);
    expect(detections[0].confidence).toBeGreaterThan(0.5);
    expect(detections[0].confidence).toBeLessThanOrEqual(0.99);
  });

  it('ignores sub-threshold specks', () => {
    const frame = solidFrame(64, 64, '#000000');
    paintRect(frame, '#e06060', 10, 10, 12, 12); // 4 px < minBlobArea 9
    expect(detectImage(frame)).toEqual([]);
  });

  it('separates touching same-class instances painted in distinct shades', () => {
    const frame = solidFrame(200, 100, '#000000');
    paintRect(frame, '#6060e0', 20, 20, 60, 50);
    paintRect(frame, '#8080e0', 60, 20, 100, 50); // adjacent, same class
    const cars = detectImage(frame).filter((d) => d.class_label === 'car');
    expect(cars).toHaveLength(2);
  });

  it('recovers the scenario-1 boxes with IoU >= 0.5', () => {
    const detections = detectImage(scene1Replica());
    const persons = detections.filter((d) => d.class_label === 'person');
    const cars = detections.filter((d) => d.class_label === 'car');
    expect(persons.length).toBeGreaterThanOrEqual(2);
    expect(cars.length).toBeGreaterThanOrEqual(2);
    for (const expected of SCENE1_PERSON_BOXES) {
      const best = Math.max(...persons.map((d) => intersectionOverUnion(d.bbox, expected)));
      expect(best).toBeGreaterThanOrEqual(0.5);
    }
    for (const expected of SCENE1_CAR_BOXES) {
      const best = Math.max(...cars.map((d) => intersectionOverUnion(d.bbox, expected)));
      expect(best).toBeGreaterThanOrEqual(0.5);
    }
  });

  it('is deterministic', () => {
    const frame = scene1Replica();
    expect(detectImage(frame)).toEqual(detectImage(frame));
  });
});
