/**
 * Synthetic frame builders for the color-key model. The reference scene
 * replica reproduces the published scenario-1 numbers as a drawable
 * fixture: two pedestrians and two cars at their reported boxes, no
 * sidewalk, and a road band close to the reported 35% global coverage.
 */

import { RgbImage, parseHexColor } from '../src/image.js';

export function solidFrame(width: number, height: number, hex: string): RgbImage {
  const key = parseHexColor(hex);
  const data = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    data[i * 3] = (key >> 16) & 0xff;
    data[i * 3 + 1] = (key >> 8) & 0xff;
    data[i * 3 + 2] = key & 0xff;
  }
  return { width, height, data };
}

/** Paint [x1, x2) x [y1, y2) in a flat color (x2/y2 exclusive). */
export function paintRect(
  image: RgbImage,
  hex: string,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
): void {
  const key = parseHexColor(hex);
  const r = (key >> 16) & 0xff;
  const g = (key >> 8) & 0xff;
  const b = key & 0xff;
  for (let y = y1; y < y2; y++) {
    for (let x = x1; x < x2; x++) {
      const base = (y * image.width + x) * 3;
      image.data[base] = r;
      image.data[base + 1] = g;
      image.data[base + 2] = b;
    }
  }
}

/** Reported scenario-1 object boxes: [x1, y1, x2, y2] exclusive. */
export const SCENE1_PERSON_BOXES: Array<[number, number, number, number]> = [
  [1400, 725, 1504, 952],
  [1568, 726, 1635, 933],
];

export const SCENE1_CAR_BOXES: Array<[number, number, number, number]> = [
  [803, 589, 866, 641],
  [750, 551, 818, 597],
];

/**
 * 1920x1080 scenario-1 replica: sky above, building band mid-frame,
 * vegetation/terrain shoulders, road lower band (378 rows = 35% before
 * objects overpaint part of it), no sidewalk anywhere.
 */
export function scene1Replica(): RgbImage {
  const image = solidFrame(1920, 1080, '#87ceeb'); // sky
  paintRect(image, '#703028', 0, 300, 1920, 702); // building band
  paintRect(image, '#228b22', 0, 540, 260, 702); // vegetation left shoulder
  paintRect(image, '#9b7653', 1660, 560, 1920, 702); // terrain right shoulder
  paintRect(image, '#808080', 0, 702, 1920, 1080); // road band (35.00%)

  const [car1, car2] = SCENE1_CAR_BOXES;
  paintRect(image, '#8080e0', ...car2); // far car first: the nearer one may occlude
  paintRect(image, '#6060e0', ...car1);
  const [person1, person2] = SCENE1_PERSON_BOXES;
  paintRect(image, '#e06060', ...person1);
  paintRect(image, '#e08080', ...person2);
  return image;
}

export function intersectionOverUnion(
  a: [number, number, number, number],
  b: [number, number, number, number],
): number {
  const ix = Math.max(0, Math.min(a[2], b[2]) - Math.max(a[0], b[0]));
  const iy = Math.max(0, Math.min(a[3], b[3]) - Math.max(a[1], b[1]));
  const inter = ix * iy;
  const areaA = (a[2] - a[0]) * (a[3] - a[1]);
  const areaB = (b[2] - b[0]) * (b[3] - b[1]);
  return inter / (areaA + areaB - inter);
}
