import { GrayRaster } from "./raster";
import type { GrayBitmap } from "./types";

export interface Stroke {
  points: [number, number][];
  width: number;
  eraser: boolean;
}

/** Drawing model behind the sketch pane.
 *
 * The raster sent to the engine derives purely from this state, so undoing
 * back to an earlier state reproduces the earlier raster byte for byte. An
 * optional backdrop (a page region pulled in for retouch) composites at full
 * strength into the query raster; eraser strokes remove any ink, the
 * backdrop's included.
 */
export class CanvasState {
  readonly size: number;
  strokes: Stroke[] = [];
  backdrop: GrayBitmap | null = null;
  private active: Stroke | null = null;

  constructor(size = 400) {
    this.size = size;
  }

  beginStroke(x: number, y: number, width: number, eraser: boolean): void {
    this.active = { points: [[x, y]], width, eraser };
  }

  extendStroke(x: number, y: number): void {
    this.active?.points.push([x, y]);
  }

  /** Returns the finished stroke, or null for a stray pointer-up. */
  endStroke(): Stroke | null {
    const done = this.active;
    this.active = null;
    if (done) this.strokes.push(done);
    return done;
  }

  undo(): void {
    this.strokes.pop();
  }

  clear(): void {
    this.strokes = [];
    this.backdrop = null;
    this.active = null;
  }

  setBackdrop(bmp: GrayBitmap | null): void {
    this.backdrop = bmp;
    this.strokes = [];
    this.active = null;
  }

  /** True when the rasterized canvas would carry no ink at all. */
  isBlank(inkThreshold = 250): boolean {
    return !this.rasterize().hasInk(inkThreshold);
  }

  /** Compose the black-on-white query raster: backdrop at full strength,
   * then strokes in order, erasers clearing to white. */
  rasterize(): GrayRaster {
    const raster = new GrayRaster(this.size, this.size);
    if (this.backdrop) {
      raster.drawBitmap(this.backdrop, 0, 0);
    }
    for (const stroke of this.strokes) {
      const pts = stroke.points;
      if (pts.length === 1) {
        raster.drawLine(pts[0][0], pts[0][1], pts[0][0], pts[0][1],
                        stroke.width, 0, stroke.eraser);
      }
      for (let i = 1; i < pts.length; i++) {
        raster.drawLine(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1],
                        stroke.width, 0, stroke.eraser);
      }
    }
    return raster;
  }

  toPngBytes(): Uint8Array {
    return this.rasterize().toPng();
  }
}
