import { encodeGrayPng } from "./png";
import type { GrayBitmap } from "./types";

/** CPU grayscale surface the query raster is composed on: the engine sees
 * exactly these pixels, independent of how the browser paints the screen. */
export class GrayRaster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height).fill(255);
  }

  set(x: number, y: number, value: number): void {
    if (x >= 0 && y >= 0 && x < this.width && y < this.height) {
      this.data[y * this.width + x] = value;
    }
  }

  /** Stamp a filled disc; ink (0) always wins over white (255). */
  private stamp(cx: number, cy: number, radius: number, value: number, erase: boolean): void {
    const r = Math.max(0.5, radius);
    const r2 = r * r;
    for (let dy = -Math.ceil(r); dy <= Math.ceil(r); dy++) {
      for (let dx = -Math.ceil(r); dx <= Math.ceil(r); dx++) {
        if (dx * dx + dy * dy <= r2) {
          const x = Math.round(cx) + dx;
          const y = Math.round(cy) + dy;
          if (x < 0 || y < 0 || x >= this.width || y >= this.height) continue;
          const i = y * this.width + x;
          this.data[i] = erase ? 255 : Math.min(this.data[i], value);
        }
      }
    }
  }

  drawLine(
    x1: number, y1: number, x2: number, y2: number,
    width: number, value: number, erase = false,
  ): void {
    const len = Math.hypot(x2 - x1, y2 - y1);
    const steps = Math.max(1, Math.ceil(len * 2));
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      this.stamp(x1 + (x2 - x1) * t, y1 + (y2 - y1) * t, width / 2, value, erase);
    }
  }

  /** Darken with a bitmap's ink: min-composite, white stays untouched. */
  drawBitmap(bmp: GrayBitmap, ox = 0, oy = 0): void {
    for (let y = 0; y < bmp.height; y++) {
      for (let x = 0; x < bmp.width; x++) {
        const tx = ox + x;
        const ty = oy + y;
        if (tx < 0 || ty < 0 || tx >= this.width || ty >= this.height) continue;
        const i = ty * this.width + tx;
        this.data[i] = Math.min(this.data[i], bmp.data[y * bmp.width + x]);
      }
    }
  }

  hasInk(threshold = 250): boolean {
    return this.data.some((v) => v < threshold);
  }

  toPng(): Uint8Array {
    return encodeGrayPng(this.width, this.height, this.data);
  }
}
