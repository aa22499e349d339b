import { vi } from "vitest";
import type { GrayBitmap, QueryResponse } from "../src/types";

/** Decode PNGs produced by the app's encoder (grayscale, filter 0, stored
 * deflate blocks). Independent of the encoder: walks the real chunk and
 * block structure. */
export function decodeStoredGrayPng(bytes: Uint8Array): GrayBitmap {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (view.getUint32(0) !== 0x89504e47) throw new Error("not a png");
  let pos = 8;
  let width = 0;
  let height = 0;
  const idat: Uint8Array[] = [];
  while (pos < bytes.length) {
    const len = view.getUint32(pos);
    const type = String.fromCharCode(...bytes.subarray(pos + 4, pos + 8));
    const body = bytes.subarray(pos + 8, pos + 8 + len);
    if (type === "IHDR") {
      width = view.getUint32(pos + 8);
      height = view.getUint32(pos + 12);
      if (body[8] !== 8 || body[9] !== 0) throw new Error("not 8-bit grayscale");
    } else if (type === "IDAT") {
      idat.push(body);
    }
    pos += 12 + len;
  }
  let stream = new Uint8Array(idat.reduce((n, b) => n + b.length, 0));
  let off = 0;
  for (const b of idat) {
    stream.set(b, off);
    off += b.length;
  }
  stream = stream.subarray(2); // zlib header
  const raw = new Uint8Array((width + 1) * height);
  let rawPos = 0;
  let p = 0;
  for (;;) {
    if (p + 5 > stream.length) throw new Error("ran off the zlib stream");
    const final = stream[p] & 1;
    if ((stream[p] >> 1) & 0x03) throw new Error("expected a stored block");
    const len = stream[p + 1] | (stream[p + 2] << 8);
    raw.set(stream.subarray(p + 5, p + 5 + len), rawPos);
    rawPos += len;
    p += 5 + len;
    if (final) break;
  }
  const data = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    if (raw[y * (width + 1)] !== 0) throw new Error("unexpected filter");
    data.set(raw.subarray(y * (width + 1) + 1, (y + 1) * (width + 1)), y * width);
  }
  return { width, height, data };
}

export interface RecordedCall {
  url: string;
  method: string;
  body: Uint8Array | null;
  json: unknown | null;
}

/** Intercepts global fetch; hands out queued QueryResponses and records
 * every outbound request for inspection. */
export class FetchMock {
  calls: RecordedCall[] = [];
  private queue: Array<{ status: number; payload: unknown }> = [];

  install(): void {
    vi.stubGlobal("fetch", (input: RequestInfo | URL, init?: RequestInit) =>
      this.handle(String(input), init),
    );
  }

  respondWith(payload: QueryResponse): void {
    this.queue.push({ status: 200, payload });
  }

  respondWithStatus(status: number, payload: unknown = { code: "blank_query" }): void {
    this.queue.push({ status, payload });
  }

  callsTo(path: string): RecordedCall[] {
    return this.calls.filter((c) => c.url.includes(path));
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    let body: Uint8Array | null = null;
    let json: unknown = null;
    if (init?.body instanceof ArrayBuffer) {
      body = new Uint8Array(init.body);
    } else if (init?.body instanceof Uint8Array) {
      body = init.body;
    } else if (typeof init?.body === "string") {
      json = JSON.parse(init.body);
    }
    this.calls.push({ url, method: init?.method ?? "GET", body, json });
    const next = this.queue.shift() ?? { status: 200, payload: { hits: [], elapsed_ms: 0 } };
    return new Response(JSON.stringify(next.payload), {
      status: next.status,
      headers: { "content-type": "application/json" },
    });
  }
}

export function makeHit(pageId: number, overrides: Partial<import("../src/types").Hit> = {}) {
  return {
    page_id: pageId,
    title_id: "demo",
    x: 40,
    y: 60,
    side: 120,
    distance: 0.25 + pageId / 100,
    thumbnail_url: `/pages/${pageId}/thumb`,
    page_url: `/pages/${pageId}`,
    ...overrides,
  };
}

export function response(...pageIds: number[]): QueryResponse {
  return { hits: pageIds.map((p) => makeHit(p)), elapsed_ms: 5 };
}

export const flush = () => new Promise<void>((resolve) => setTimeout(resolve, 0));

export function mouse(el: Element, type: string, x: number, y: number): void {
  el.dispatchEvent(new MouseEvent(type, { clientX: x, clientY: y, bubbles: true }));
}

export function drawStroke(canvas: Element, points: [number, number][]): void {
  mouse(canvas, "mousedown", points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) {
    mouse(canvas, "mousemove", x, y);
  }
  const last = points[points.length - 1];
  mouse(canvas, "mouseup", last[0], last[1]);
}
