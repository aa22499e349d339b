import type { GrayBitmap, Rect } from "./types";

/** Fetches a page region and hands back grayscale pixels for retouch.
 * Swappable so integration tests can feed known pixels without a real
 * canvas implementation. */
export interface BackdropSource {
  loadRegion(pageId: number, rect: Rect, targetSize: number): Promise<GrayBitmap>;
}

/** Browser implementation: decode the region PNG through an offscreen
 * canvas and resample it onto the sketch canvas size. */
export class FetchBackdropSource implements BackdropSource {
  constructor(private base = "") {}

  async loadRegion(pageId: number, rect: Rect, targetSize: number): Promise<GrayBitmap> {
    const side = Math.max(rect.w, rect.h);
    const x = Math.max(0, rect.x + Math.floor((rect.w - side) / 2));
    const y = Math.max(0, rect.y + Math.floor((rect.h - side) / 2));
    const url = `${this.base}/pages/${pageId}/region?x=${x}&y=${y}&side=${side}`;
    const resp = await fetch(url);
    if (!resp.ok) {
      throw new Error(`region fetch failed: HTTP ${resp.status}`);
    }
    const blob = await resp.blob();
    const bitmap = await createImageBitmap(blob);
    const canvas = document.createElement("canvas");
    canvas.width = targetSize;
    canvas.height = targetSize;
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    ctx.fillStyle = "#fff";
    ctx.fillRect(0, 0, targetSize, targetSize);
    ctx.drawImage(bitmap, 0, 0, targetSize, targetSize);
    const rgba = ctx.getImageData(0, 0, targetSize, targetSize).data;
    const gray = new Uint8Array(targetSize * targetSize);
    for (let i = 0; i < gray.length; i++) {
      const r = rgba[i * 4];
      const g = rgba[i * 4 + 1];
      const b = rgba[i * 4 + 2];
      gray[i] = Math.round(0.299 * r + 0.587 * g + 0.114 * b);
    }
    return { width: targetSize, height: targetSize, data: gray };
  }
}
