/**
 * Minimal image I/O: binary PPM (P6) frames in, binary PGM (P5) label
 * maps out. Both are header + raw bytes, so the adapter needs no native
 * image dependencies and its outputs stay byte-reproducible.
 */

import * as fs from 'fs';

export interface RgbImage {
  width: number;
  height: number;
  /** RGB triplets, row-major, 3 bytes per pixel. */
  data: Uint8Array;
}

export interface GrayImage {
  width: number;
  height: number;
  /** One byte per pixel, row-major. */
  data: Uint8Array;
}

/** Parse the whitespace/comment-separated header tokens of a PNM file. */
function readHeader(buf: Buffer, magic: string): { width: number; height: number; offset: number } {
  const tokens: string[] = [];
  let pos = 0;
  while (tokens.length < 4 && pos < buf.length) {
    while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (buf[pos] === 0x23 /* '#' */) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (pos > start) tokens.push(buf.toString('ascii', start, pos));
  }
  if (tokens.length < 4 || tokens[0] !== magic) {
    throw new Error(`not a ${magic} file (header ${tokens.slice(0, 1).join(' ')})`);
  }
  const [width, height, maxval] = tokens.slice(1).map(Number);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error(`bad ${magic} dimensions ${tokens[1]}x${tokens[2]}`);
  }
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval} (want 255)`);
  return { width, height, offset: pos + 1 };
}

export function readPpm(path: string): RgbImage {
  const buf = fs.readFileSync(path);
  const { width, height, offset } = readHeader(buf, 'P6');
  const expected = width * height * 3;
  const data = buf.subarray(offset, offset + expected);
  if (data.length !== expected) {
    throw new Error(`${path}: expected ${expected} pixel bytes, found ${data.length}`);
  }
  return { width, height, data: new Uint8Array(data) };
}

export function writePpm(path: string, image: RgbImage): void {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, 'ascii');
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(image.data)]));
}

export function readPgm(path: string): GrayImage {
  const buf = fs.readFileSync(path);
  const { width, height, offset } = readHeader(buf, 'P5');
  const expected = width * height;
  const data = buf.subarray(offset, offset + expected);
  if (data.length !== expected) {
    throw new Error(`${path}: expected ${expected} pixel bytes, found ${data.length}`);
  }
  return { width, height, data: new Uint8Array(data) };
}

export function writePgm(path: string, image: GrayImage): void {
  const header = Buffer.from(`P5\n${image.width} ${image.height}\n255\n`, 'ascii');
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(image.data)]));
}

/** Pack an (r, g, b) triplet into a single comparable integer key. */
export function colorKey(r: number, g: number, b: number): number {
  return (r << 16) | (g << 8) | b;
}

export function colorKeyAt(image: RgbImage, index: number): number {
  const base = index * 3;
  return colorKey(image.data[base], image.data[base + 1], image.data[base + 2]);
}

export function parseHexColor(hex: string): number {
  const m = /^#?([0-9a-fA-F]{6})$/.exec(hex);
  if (!m) throw new Error(`bad color ${hex} (want #rrggbb)`);
  return parseInt(m[1], 16);
}
